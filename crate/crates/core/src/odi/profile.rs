use serde::{Deserialize, Serialize};

use super::catalog::CatalogProfile;
use super::Side;
use crate::numerics::{hermite3, hermite5};

/// Profile sampled on a graded mesh `t_j = r (j/N)^q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledProfile {
    pub grading: f64,
    pub t: Vec<f64>,
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    pub d2: Vec<f64>,
    /// Initial slope found by shooting.
    pub slope: f64,
}

impl SampledProfile {
    fn eval(&self, r: f64, t: f64) -> [f64; 3] {
        let n = self.t.len() - 1;
        let t = t.clamp(0.0, r);
        let s = (t / r).powf(1.0 / self.grading);
        let mut j = ((s * n as f64).floor() as usize).min(n - 1);
        while j > 0 && self.t[j] > t {
            j -= 1;
        }
        while j + 1 < n && self.t[j + 1] < t {
            j += 1;
        }
        let (a, b) = (j, j + 1);
        if self.d2[a].is_finite() && self.d2[b].is_finite() {
            hermite5(
                self.t[a],
                self.t[b],
                [self.h[a], self.g[a], self.d2[a]],
                [self.h[b], self.g[b], self.d2[b]],
                t,
            )
        } else {
            hermite3(self.t[a], self.t[b], [self.h[a], self.g[a]], [self.h[b], self.g[b]], t)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "repr", rename_all = "snake_case")]
pub enum ProfileKind {
    Closed(CatalogProfile),
    Sampled(SampledProfile),
}

/// Increasing profile `h` on `[0, r]` with `h(0) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierProfile {
    pub side: Side,
    pub r: f64,
    pub boundary_value: f64,
    pub kind: ProfileKind,
}

impl BarrierProfile {
    /// `(h, h', h'')` at `t`.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        match &self.kind {
            ProfileKind::Closed(c) => c.eval(t),
            ProfileKind::Sampled(s) => s.eval(self.r, t),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t)[0]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval(t)[1]
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        self.eval(t)[2]
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.kind, ProfileKind::Closed(_))
    }

    /// Rows `(t, h, h', h'')` on `t_j = j r / n`.
    pub fn table(&self, n: usize) -> Vec<[f64; 4]> {
        (0..=n)
            .map(|j| {
                let t = self.r * j as f64 / n as f64;
                let [h, g, d] = self.eval(t);
                [t, h, g, d]
            })
            .collect()
    }

    /// Largest `|h1 - h2|` over `t_j = j r / n`.
    pub fn sup_distance(&self, other: &BarrierProfile, n: usize) -> f64 {
        (0..=n)
            .map(|j| {
                let t = self.r * j as f64 / n as f64;
                (self.value(t) - other.value(t)).abs()
            })
            .fold(0.0, f64::max)
    }
}
