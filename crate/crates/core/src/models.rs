//! Lorenz drive, x-driven response, and the autonomous auxiliary copy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{DrivenField, State3, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub r: f64,
    pub b: f64,
}

impl LorenzParams {
    /// sigma = 10, r = 60, b = 8/3: chaotic, largest exponent close to 1.40.
    pub const fn standard() -> Self {
        Self { sigma: 10.0, r: 60.0, b: 8.0 / 3.0 }
    }

    /// The values with r and b in printed order (r = 8/3, b = 60). Not chaotic;
    /// kept for comparison runs.
    pub const fn as_printed() -> Self {
        Self { sigma: 10.0, r: 8.0 / 3.0, b: 60.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if ok(self.sigma) && ok(self.r) && ok(self.b) {
            Ok(())
        } else {
            Err(Error::Config(format!("Lorenz parameters must be positive: {self:?}")))
        }
    }
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Standard,
    AsPrinted,
}

impl Preset {
    pub fn params(self) -> LorenzParams {
        match self {
            Preset::Standard => LorenzParams::standard(),
            Preset::AsPrinted => LorenzParams::as_printed(),
        }
    }
}

/// Which form of the generator/receiver equations to use.
///
/// `Standard` is textbook Lorenz with Pecora-Carroll x-replacement.
/// `AsPrinted` keeps the typeset forms `dy/dt = -xz + ry - y` and
/// `dx'/dt = sigma (y' - s)`, `dy'/dt = -s z' + r y' - y'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingVariant {
    #[default]
    Standard,
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzDrive {
    pub params: LorenzParams,
    pub variant: CouplingVariant,
}

impl VectorField for LorenzDrive {
    #[inline]
    fn eval(&self, _t: f64, s: State3) -> State3 {
        let LorenzParams { sigma, r, b } = self.params;
        let (x, y, z) = (s.x1, s.x2, s.x3);
        match self.variant {
            CouplingVariant::Standard => State3::new(sigma * (y - x), r * x - y - x * z, x * y - b * z),
            CouplingVariant::AsPrinted => State3::new(sigma * (y - x), -x * z + r * y - y, x * y - b * z),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzResponse {
    pub params: LorenzParams,
    pub variant: CouplingVariant,
}

impl DrivenField for LorenzResponse {
    #[inline]
    fn eval(&self, _t: f64, y: State3, s: f64) -> State3 {
        let LorenzParams { sigma, r, b } = self.params;
        match self.variant {
            CouplingVariant::Standard => {
                State3::new(sigma * (y.x2 - y.x1), r * s - y.x2 - s * y.x3, s * y.x2 - b * y.x3)
            }
            CouplingVariant::AsPrinted => {
                State3::new(sigma * (y.x2 - s), -s * y.x3 + r * y.x2 - y.x2, s * y.x2 - b * y.x3)
            }
        }
    }
}

pub fn drive_field(params: LorenzParams, variant: CouplingVariant) -> LorenzDrive {
    LorenzDrive { params, variant }
}

pub fn response_field(params: LorenzParams, variant: CouplingVariant) -> LorenzResponse {
    LorenzResponse { params, variant }
}

/// Free-running copy of the standard drive system, used to let a deviated
/// state evolve on its own.
pub fn auxiliary_field(params: LorenzParams) -> LorenzDrive {
    drive_field(params, CouplingVariant::Standard)
}
