//! Continuous piecewise-linear embeddings of discrete multichannel observations.
//!
//! Each channel may be observed on its own time stamps. [`interpolate_path`]
//! merges the channels onto the sorted union of all observation times, filling
//! a channel's value at a time it did not observe by linear interpolation
//! between its own neighbouring observations and holding it constant outside
//! its observed range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observations of one channel of a functional sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel", into = "RawChannel")]
pub struct ChannelSeries {
    channel: usize,
    times: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawChannel {
    channel: usize,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawChannel> for ChannelSeries {
    type Error = Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        ChannelSeries::new(raw.channel, raw.times, raw.values)
    }
}

impl From<ChannelSeries> for RawChannel {
    fn from(c: ChannelSeries) -> Self {
        RawChannel {
            channel: c.channel,
            times: c.times,
            values: c.values,
        }
    }
}

impl ChannelSeries {
    /// Build a channel, checking that times are finite and strictly increasing,
    /// values are finite and there are at least two observations.
    pub fn new(channel: usize, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid(format!(
                "channel {channel}: {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::invalid(format!(
                "channel {channel}: needs at least 2 observations, got {}",
                times.len()
            )));
        }
        if let Some(k) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::invalid(format!(
                "channel {channel}: non-finite time at position {k}"
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "channel {channel}: non-finite value at position {k}"
            )));
        }
        if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "channel {channel}: times not strictly increasing at position {}",
                k + 1
            )));
        }
        Ok(Self {
            channel,
            times,
            values,
        })
    }

    pub fn channel(&self) -> usize {
        self.channel
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation between this channel's own observations, constant
    /// beyond the first and last observation.
    pub fn value_at(&self, t: f64) -> f64 {
        let times = &self.times;
        let last = times.len() - 1;
        if t <= times[0] {
            return self.values[0];
        }
        if t >= times[last] {
            return self.values[last];
        }
        // first index with times[k] > t; 1 <= k <= last
        let k = times.partition_point(|&s| s <= t);
        let (t0, t1) = (times[k - 1], times[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        if t == t0 {
            return v0;
        }
        let w = (t - t0) / (t1 - t0);
        v0 + w * (v1 - v0)
    }
}

/// A continuous path given by its vertices; linear between consecutive vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearPath {
    times: Vec<f64>,
    /// Row-major `times.len() x dim`.
    points: Vec<f64>,
    dim: usize,
}

impl PiecewiseLinearPath {
    /// `points` is row-major with one row of length `dim` per time stamp.
    pub fn new(times: Vec<f64>, points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("path dimension must be at least 1"));
        }
        if times.len() < 2 {
            return Err(Error::invalid(format!(
                "path needs at least 2 vertices, got {}",
                times.len()
            )));
        }
        if points.len() != times.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: times.len() * dim,
                found: points.len(),
            });
        }
        if times.iter().chain(points.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("path contains non-finite entries"));
        }
        if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "vertex times not strictly increasing at vertex {}",
                k + 1
            )));
        }
        Ok(Self { times, points, dim })
    }

    /// Build from `(time, point)` pairs.
    pub fn from_vertices<P: AsRef<[f64]>>(vertices: &[(f64, P)]) -> Result<Self> {
        let dim = vertices.first().map_or(0, |(_, p)| p.as_ref().len());
        let mut times = Vec::with_capacity(vertices.len());
        let mut points = Vec::with_capacity(vertices.len() * dim);
        for (t, p) in vertices {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            times.push(*t);
            points.extend_from_slice(p);
        }
        Self::new(times, points, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn vertex(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    /// Exact linear interpolation; constant outside the domain.
    pub fn evaluate(&self, t: f64) -> Vec<f64> {
        let last = self.times.len() - 1;
        if t <= self.times[0] {
            return self.vertex(0).to_vec();
        }
        if t >= self.times[last] {
            return self.vertex(last).to_vec();
        }
        let k = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        self.vertex(k - 1)
            .iter()
            .zip(self.vertex(k))
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }

    /// Segment displacements `x_{k+1} - x_k`, one per segment.
    pub fn increments(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.times.len() - 1).map(move |k| {
            self.vertex(k + 1)
                .iter()
                .zip(self.vertex(k))
                .map(|(b, a)| b - a)
                .collect()
        })
    }

    /// Sub-path over vertices `from..=to`.
    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        if to <= from || to >= self.len() {
            return Err(Error::invalid(format!(
                "invalid vertex range {from}..={to} for a path of {} vertices",
                self.len()
            )));
        }
        Self::new(
            self.times[from..=to].to_vec(),
            self.points[from * self.dim..(to + 1) * self.dim].to_vec(),
            self.dim,
        )
    }
}

/// A path whose last coordinate is its own time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPath {
    path: PiecewiseLinearPath,
}

impl AugmentedPath {
    /// Alphabet size of the signature: channel count plus the time coordinate.
    pub fn dim(&self) -> usize {
        self.path.dim()
    }

    /// The augmented vertices (time is the last coordinate).
    pub fn as_path(&self) -> &PiecewiseLinearPath {
        &self.path
    }

    pub fn into_path(self) -> PiecewiseLinearPath {
        self.path
    }

    pub fn total_variation(&self) -> f64 {
        total_variation(&self.path)
    }
}

/// Merge channels onto the union of their observation times.
pub fn interpolate_path(channels: &[ChannelSeries], d_minus_1: usize) -> Result<PiecewiseLinearPath> {
    if channels.is_empty() {
        return Err(Error::invalid("no channels supplied"));
    }
    if channels.len() != d_minus_1 {
        return Err(Error::DimensionMismatch {
            expected: d_minus_1,
            found: channels.len(),
        });
    }
    let mut ordered: Vec<&ChannelSeries> = channels.iter().collect();
    ordered.sort_by_key(|c| c.channel());
    for (k, c) in ordered.iter().enumerate() {
        if c.channel() != k {
            return Err(Error::invalid(format!(
                "channel indices must be 0..{} without gaps or repeats, found {}",
                d_minus_1 - 1,
                c.channel()
            )));
        }
    }

    let mut grid: Vec<f64> = ordered.iter().flat_map(|c| c.times().iter().copied()).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let dim = d_minus_1;
    let mut points = vec![0.0; grid.len() * dim];
    for (j, channel) in ordered.iter().enumerate() {
        // walk the grid and the channel together; exact copies at observed times
        let times = channel.times();
        let values = channel.values();
        let mut next = 0;
        for (k, &t) in grid.iter().enumerate() {
            while next < times.len() && times[next] < t {
                next += 1;
            }
            points[k * dim + j] = if next < times.len() && times[next] == t {
                values[next]
            } else {
                channel.value_at(t)
            };
        }
    }
    PiecewiseLinearPath::new(grid, points, dim)
}

/// Append the identity channel `t` as the last coordinate.
pub fn time_augment(path: &PiecewiseLinearPath) -> AugmentedPath {
    let dim = path.dim() + 1;
    let mut points = Vec::with_capacity(path.len() * dim);
    for (k, &t) in path.times().iter().enumerate() {
        points.extend_from_slice(path.vertex(k));
        points.push(t);
    }
    AugmentedPath {
        path: PiecewiseLinearPath {
            times: path.times().to_vec(),
            points,
            dim,
        },
    }
}

/// Sum of Euclidean segment lengths.
pub fn total_variation(path: &PiecewiseLinearPath) -> f64 {
    path.increments()
        .map(|dx| dx.iter().map(|v| v * v).sum::<f64>().sqrt())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(channel: usize, pts: &[(f64, f64)]) -> ChannelSeries {
        ChannelSeries::new(
            channel,
            pts.iter().map(|p| p.0).collect(),
            pts.iter().map(|p| p.1).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_grids_copy_values() {
        let a = series(0, &[(0.0, 1.0), (0.5, 2.0), (1.0, 3.0)]);
        let b = series(1, &[(0.0, -1.0), (0.5, -2.0), (1.0, -3.0)]);
        let path = interpolate_path(&[a, b], 2).unwrap();
        assert_eq!(path.times(), &[0.0, 0.5, 1.0]);
        assert_eq!(path.points(), &[1.0, -1.0, 2.0, -2.0, 3.0, -3.0]);
    }

    #[test]
    fn missing_time_is_interpolated() {
        let a = series(0, &[(0.0, 0.0), (1.0, 2.0)]);
        let b = series(1, &[(0.0, 5.0), (0.5, 6.0), (1.0, 7.0)]);
        let path = interpolate_path(&[a, b], 2).unwrap();
        assert_eq!(path.times(), &[0.0, 0.5, 1.0]);
        assert_eq!(path.vertex(1), &[1.0, 6.0]);
    }

    #[test]
    fn constant_extrapolation_outside_channel_range() {
        let a = series(0, &[(0.2, 1.0), (0.6, 3.0)]);
        let b = series(1, &[(0.0, 0.0), (1.0, 1.0)]);
        let path = interpolate_path(&[a, b], 2).unwrap();
        assert_eq!(path.times(), &[0.0, 0.2, 0.6, 1.0]);
        assert_eq!(path.vertex(0)[0], 1.0);
        assert_eq!(path.vertex(3)[0], 3.0);
    }

    #[test]
    fn channels_in_any_order() {
        let a = series(1, &[(0.0, 1.0), (1.0, 2.0)]);
        let b = series(0, &[(0.0, 3.0), (1.0, 4.0)]);
        let path = interpolate_path(&[a, b], 2).unwrap();
        assert_eq!(path.vertex(0), &[3.0, 1.0]);
    }

    #[test]
    fn rejects_bad_channels() {
        assert!(ChannelSeries::new(0, vec![0.0], vec![1.0]).is_err());
        assert!(ChannelSeries::new(0, vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(ChannelSeries::new(0, vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(ChannelSeries::new(0, vec![0.0, f64::INFINITY], vec![1.0, 2.0]).is_err());
        assert!(interpolate_path(&[], 0).is_err());
        let a = series(0, &[(0.0, 0.0), (1.0, 2.0)]);
        assert!(interpolate_path(std::slice::from_ref(&a), 2).is_err());
        let dup = series(0, &[(0.0, 0.0), (1.0, 2.0)]);
        assert!(interpolate_path(&[a, dup], 2).is_err());
    }

    #[test]
    fn time_augmentation_appends_time() {
        let path = PiecewiseLinearPath::from_vertices(&[(0.0, [5.0]), (1.0, [7.0])]).unwrap();
        let aug = time_augment(&path);
        assert_eq!(aug.dim(), 2);
        assert_eq!(aug.as_path().vertex(0), &[5.0, 0.0]);
        assert_eq!(aug.as_path().vertex(1), &[7.0, 1.0]);
        let time_tv: f64 = aug.as_path().increments().map(|d| d[1].abs()).sum();
        assert_eq!(time_tv, 1.0);
    }

    #[test]
    fn total_variation_of_simple_paths() {
        let constant = PiecewiseLinearPath::from_vertices(&[(0.0, [1.0, 1.0]), (1.0, [1.0, 1.0])]).unwrap();
        assert_eq!(total_variation(&constant), 0.0);
        let line = PiecewiseLinearPath::from_vertices(&[(0.0, [0.0, 0.0]), (1.0, [3.0, 4.0])]).unwrap();
        assert_eq!(total_variation(&line), 5.0);
    }

    #[test]
    fn evaluate_interpolates_between_vertices() {
        let path = PiecewiseLinearPath::from_vertices(&[(0.0, [0.0]), (2.0, [4.0]), (3.0, [0.0])]).unwrap();
        assert_eq!(path.evaluate(1.0), vec![2.0]);
        assert_eq!(path.evaluate(2.5), vec![2.0]);
        assert_eq!(path.evaluate(-1.0), vec![0.0]);
        assert_eq!(path.evaluate(9.0), vec![0.0]);
    }
}
