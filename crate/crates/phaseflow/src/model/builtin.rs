use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::{ConvexPotential, LatentHeat, NonconvexPotential};

/// Named numeric parameters of a built-in law.
pub type Params = BTreeMap<String, f64>;

/// One slot of a [`super::ModelSpec`].
#[derive(Clone, Debug)]
pub enum Component {
    HeatFlux(ConvexPotential),
    Well(NonconvexPotential),
    Latent(LatentHeat),
}

impl Component {
    pub fn into_heat_flux(self) -> Result<ConvexPotential> {
        match self {
            Component::HeatFlux(j) => Ok(j),
            other => Err(Error::InvalidParameter(format!(
                "{} is not a heat-flux law",
                other.name()
            ))),
        }
    }

    pub fn into_well(self) -> Result<NonconvexPotential> {
        match self {
            Component::Well(w) => Ok(w),
            other => Err(Error::InvalidParameter(format!(
                "{} is not a potential W",
                other.name()
            ))),
        }
    }

    pub fn into_latent(self) -> Result<LatentHeat> {
        match self {
            Component::Latent(l) => Ok(l),
            other => Err(Error::InvalidParameter(format!(
                "{} is not a latent heat",
                other.name()
            ))),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Component::HeatFlux(j) => &j.name,
            Component::Well(w) => &w.name,
            Component::Latent(l) => &l.name,
        }
    }
}

/// Builds a catalog potential by name.
///
/// | name             | parameters (default)          |
/// |------------------|-------------------------------|
/// | `caginalp_j`     | none                          |
/// | `penrose_fife_j` | `tau_c` (1), `sigma` (1/τc²)  |
/// | `mixed_j`        | `tau_c` (1)                   |
/// | `quartic_W`      | none                          |
/// | `logarithmic_W`  | `c` (2)                       |
/// | `linear_lambda`  | `ell` (1)                     |
/// | `tanh_lambda`    | `ell` (1)                     |
pub fn builtin(name: &str, params: &Params) -> Result<Component> {
    let allowed: &[&str] = match name {
        "caginalp_j" | "quartic_W" => &[],
        "penrose_fife_j" => &["tau_c", "sigma"],
        "mixed_j" => &["tau_c"],
        "logarithmic_W" => &["c"],
        "linear_lambda" | "tanh_lambda" => &["ell"],
        _ => return Err(Error::UnknownModel(name.to_string())),
    };
    if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidParameter(format!("{name} has no parameter `{bad}`")));
    }
    let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);

    Ok(match name {
        "caginalp_j" => Component::HeatFlux(ConvexPotential::caginalp()),
        "penrose_fife_j" => {
            let tau_c = get("tau_c", 1.0);
            let sigma = get("sigma", 1.0 / (tau_c * tau_c));
            Component::HeatFlux(ConvexPotential::penrose_fife(tau_c, sigma)?)
        }
        "mixed_j" => Component::HeatFlux(ConvexPotential::mixed(get("tau_c", 1.0))?),
        "quartic_W" => Component::Well(NonconvexPotential::quartic()),
        "logarithmic_W" => Component::Well(NonconvexPotential::logarithmic(get("c", 2.0))?),
        "linear_lambda" => Component::Latent(LatentHeat::linear(get("ell", 1.0))),
        "tanh_lambda" => Component::Latent(LatentHeat::tanh(get("ell", 1.0))),
        _ => unreachable!(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn quartic_constants() {
        let w = builtin("quartic_W", &Params::new()).unwrap().into_well().unwrap();
        assert_eq!(w.w(0.0).unwrap(), 0.25);
        assert_eq!(w.dw(1.0).unwrap(), 0.0);
        assert_eq!(w.dw(-1.0).unwrap(), 0.0);
        assert_eq!(w.kappa, 1.0);
        assert_eq!(w.mu, 3.0);
        assert_eq!((w.core.lo, w.core.hi), (-2.0, 2.0));
    }

    #[test]
    fn mixed_law_equilibrium() {
        let j = builtin("mixed_j", &params(&[("tau_c", 1.0)]))
            .unwrap()
            .into_heat_flux()
            .unwrap();
        assert_eq!(j.theta_inf, 0.0);
        assert_eq!(j.j(0.0).unwrap(), 0.0);
        assert_eq!(j.dj(0.0).unwrap(), 0.0);
        assert_eq!(j.sigma, 1.0);
    }

    #[test]
    fn linear_lambda_has_no_curvature() {
        let l = builtin("linear_lambda", &params(&[("ell", 2.0)]))
            .unwrap()
            .into_latent()
            .unwrap();
        assert!(l.curvature_bound > 0.0);
        for r in [-3.0, 0.0, 5.0] {
            assert_eq!(l.d2(r), 0.0);
            assert_eq!(l.d1(r), 2.0);
        }
    }

    #[test]
    fn unknown_names_and_parameters() {
        assert!(matches!(
            builtin("obstacle_W", &Params::new()),
            Err(Error::UnknownModel(_))
        ));
        assert!(matches!(
            builtin("quartic_W", &params(&[("c", 1.0)])),
            Err(Error::InvalidParameter(_))
        ));
        assert!(builtin("logarithmic_W", &params(&[("c", 0.5)])).is_err());
    }
}
