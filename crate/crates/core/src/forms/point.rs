use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::ops::Deref;

/// Ambient coordinates together with a mask of angle-valued slots.
///
/// Derefs to `[f64]`, so a `&Point` can be passed wherever coordinates are expected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: Vec<f64>,
    periodic: u32,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords, periodic: 0 }
    }

    pub fn with_periodic(coords: Vec<f64>, periodic: u32) -> Self {
        Self { coords, periodic }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn periodic_mask(&self) -> u32 {
        self.periodic
    }

    pub fn is_periodic(&self, i: usize) -> bool {
        self.periodic & (1 << i) != 0
    }

    /// Euclidean distance with angle slots compared mod 2π.
    pub fn distance(&self, other: &[f64]) -> f64 {
        self.coords
            .iter()
            .zip(other)
            .enumerate()
            .map(|(i, (a, b))| {
                let mut d = a - b;
                if self.is_periodic(i) {
                    d = d.rem_euclid(TAU);
                    d = d.min(TAU - d);
                }
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Self::new(coords)
    }
}
