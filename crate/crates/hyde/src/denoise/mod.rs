//! The denoising methods and their registry.
//!
//! Every method maps a cube to a cube of the same dimensions and is fully
//! deterministic. [`Method`] names the entry points for the CLI and the
//! tiling engine; [`DenoiseParams`] carries the optional knobs, with
//! method-specific defaults filled in where a field is absent.

mod forpdn;
mod hyminor;
mod hyres;
mod otvca;
pub(crate) mod subspace;
mod wsrrr;

pub use forpdn::forpdn;
pub use hyminor::{hyminor, l1_spectral_smooth};
pub use hyres::hyres;
pub use otvca::{otvca, OtvcaOutput};
pub use subspace::{estimate_noise, hysime, SubspaceModel};
pub use wsrrr::{wsrrr, WsrrrOutput};

use serde::{Deserialize, Serialize};

use crate::cube::HsiCube;
use crate::error::{HydeError, Result};

/// Optional solver knobs; `None` means the method's own default. HyRes takes
/// no parameters at all and ignores this.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenoiseParams {
    /// Subspace dimension; defaults to the HySime estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    /// Regularization weight; the default is method-specific.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

/// Registered denoiser names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hyres,
    Forpdn,
    Wsrrr,
    Otvca,
    Hyminor,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Hyres,
        Method::Forpdn,
        Method::Wsrrr,
        Method::Otvca,
        Method::Hyminor,
    ];

    pub fn parse(name: &str) -> Result<Method> {
        match name.to_ascii_lowercase().as_str() {
            "hyres" => Ok(Method::Hyres),
            "forpdn" => Ok(Method::Forpdn),
            "wsrrr" => Ok(Method::Wsrrr),
            "otvca" => Ok(Method::Otvca),
            "hyminor" => Ok(Method::Hyminor),
            other => Err(HydeError::Parameter(format!(
                "unknown method {other:?} (available: hyres, forpdn, wsrrr, otvca, hyminor)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Hyres => "hyres",
            Method::Forpdn => "forpdn",
            Method::Wsrrr => "wsrrr",
            Method::Otvca => "otvca",
            Method::Hyminor => "hyminor",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = HydeError;

    fn from_str(s: &str) -> Result<Method> {
        Method::parse(s)
    }
}

/// Run a registered method. Feature/component outputs of WSRRR and OTVCA are
/// dropped here; call those methods directly to keep them.
pub fn denoise(method: Method, cube: &HsiCube, params: &DenoiseParams) -> Result<HsiCube> {
    match method {
        Method::Hyres => hyres(cube),
        Method::Forpdn => forpdn(cube, params),
        Method::Wsrrr => wsrrr(cube, params).map(|out| out.denoised),
        Method::Otvca => otvca(cube, params).map(|out| out.denoised),
        Method::Hyminor => hyminor(cube, params),
    }
}
