use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

const BLOCK_T: [f64; 11] = [0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81];
const BLOCK_H: [f64; 11] = [4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2];
const BUMP_H: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
const BUMP_W: [f64; 11] = [0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005];

fn blocks(t: f64) -> f64 {
    BLOCK_T.iter().zip(BLOCK_H).map(|(&tj, h)| h * (1.0 + (t - tj).signum()) / 2.0).sum()
}

fn bumps(t: f64) -> f64 {
    BLOCK_T.iter().zip(BUMP_H).zip(BUMP_W).map(|((&tj, h), w)| h * (1.0 + ((t - tj) / w).abs()).powi(-4)).sum()
}

fn heavisine(t: f64) -> f64 {
    4.0 * (4.0 * PI * t).sin() - (t - 0.3).signum() - (0.72 - t).signum()
}

fn doppler(t: f64) -> f64 {
    (t * (1.0 - t)).sqrt() * (2.1 * PI / (t + 0.05)).sin()
}

/// Signals on the unit square.
///
/// The four classical one-dimensional signals are lifted to two dimensions as
/// `s(x) + s(y)/2`. `G1` and `Mfc` are stand-ins with the same character
/// (smooth bumps, and a piecewise-constant map); they are not the published
/// formulas. `Custom` wraps any user evaluator.
#[derive(Clone)]
pub enum TestField {
    G1,
    Mfc,
    Blocks,
    Doppler,
    Bumps,
    Heavisine,
    Custom { name: String, eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> },
}

impl TestField {
    pub fn custom(name: &str, eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        TestField::Custom { name: name.to_string(), eval: Arc::new(eval) }
    }

    /// The shipped fields, in table order.
    pub fn builtin() -> Vec<TestField> {
        vec![TestField::G1, TestField::Mfc, TestField::Blocks, TestField::Doppler, TestField::Bumps, TestField::Heavisine]
    }

    pub fn name(&self) -> &str {
        match self {
            TestField::G1 => "g1",
            TestField::Mfc => "mfc",
            TestField::Blocks => "blocks",
            TestField::Doppler => "doppler",
            TestField::Bumps => "bumps",
            TestField::Heavisine => "heavisine",
            TestField::Custom { name, .. } => name,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        TestField::builtin().into_iter().find(|f| f.name() == name).ok_or_else(|| {
            Error::InvalidConfig(format!("unknown test field '{name}' (expected g1, mfc, blocks, doppler, bumps or heavisine)"))
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let lift = |s: fn(f64) -> f64| s(x) + s(y) / 2.0;
        match self {
            TestField::G1 => {
                // Franke's surface
                let a = 0.75 * (-((9.0 * x - 2.0).powi(2) + (9.0 * y - 2.0).powi(2)) / 4.0).exp();
                let b = 0.75 * (-(9.0 * x + 1.0).powi(2) / 49.0 - (9.0 * y + 1.0) / 10.0).exp();
                let c = 0.5 * (-((9.0 * x - 7.0).powi(2) + (9.0 * y - 3.0).powi(2)) / 4.0).exp();
                let d = 0.2 * (-(9.0 * x - 4.0).powi(2) - (9.0 * y - 7.0).powi(2)).exp();
                a + b + c - d
            }
            TestField::Mfc => {
                let disc = if (x - 0.35).powi(2) + (y - 0.6).powi(2) < 0.04 { 2.0 } else { 0.0 };
                let band = if x + y > 1.3 { 1.0 } else { 0.0 };
                let corner = if x > 0.7 && y < 0.3 { -1.5 } else { 0.0 };
                disc + band + corner
            }
            TestField::Blocks => lift(blocks),
            TestField::Doppler => lift(doppler),
            TestField::Bumps => lift(bumps),
            TestField::Heavisine => lift(heavisine),
            TestField::Custom { eval, .. } => eval(x, y),
        }
    }
}

impl fmt::Debug for TestField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TestField({})", self.name())
    }
}
