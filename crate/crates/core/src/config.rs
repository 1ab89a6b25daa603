//! Full network description: power budget plus the law of every link.

use serde::{Deserialize, Serialize};

use crate::channels::{OpticalLinkParams, RayleighGainParams, ShadowedRicianParams};
use crate::system::PowerConfig;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(v: f64) -> f64 {
    10.0 * v.log10()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub power: PowerConfig,
    /// source to primary receiver and jammer to primary receiver
    pub sp: RayleighGainParams,
    pub sjp: RayleighGainParams,
    /// source to relay, source to first eavesdropper, jammer to first eavesdropper
    pub sr: ShadowedRicianParams,
    pub se1: ShadowedRicianParams,
    pub sje1: ShadowedRicianParams,
    /// relay to destination and relay to second eavesdropper
    pub d: OpticalLinkParams,
    pub e2: OpticalLinkParams,
}

impl NetworkConfig {
    /// The default operating point.
    pub fn defaults(jammer_on: bool) -> Self {
        let sr = ShadowedRicianParams::new(1.4, 2, 3.0).unwrap();
        let ray = RayleighGainParams::new(0.8).unwrap();
        let optical = |mu_db: f64| OpticalLinkParams::new(6.1096, 1.0794, 1.1227, db_to_linear(mu_db), 1).unwrap();
        NetworkConfig {
            power: PowerConfig {
                gs: db_to_linear(60.0),
                gsj: db_to_linear(10.0),
                gi: db_to_linear(9.0),
                gth: db_to_linear(2.0),
                jammer_on,
            },
            sp: ray,
            sjp: ray,
            sr: sr.clone(),
            se1: sr.clone(),
            sje1: sr,
            d: optical(40.0),
            e2: optical(20.0),
        }
    }

    pub fn with_jammer(&self, on: bool) -> Self {
        let mut c = self.clone();
        c.power.jammer_on = on;
        c
    }

    pub fn validate(&self) -> Result<(), String> {
        self.power.validate()?;
        for p in [&self.d, &self.e2] {
            OpticalLinkParams::new(p.alpha, p.beta, p.xi, p.mu, p.r)?;
        }
        for p in [&self.sr, &self.se1, &self.sje1] {
            ShadowedRicianParams::new(p.b, p.m, p.omega)?;
        }
        RayleighGainParams::new(self.sp.lambda)?;
        RayleighGainParams::new(self.sjp.lambda)?;
        Ok(())
    }

    /// Sets b and Omega on all three shadowed-Rician links.
    pub fn set_sr_all(&mut self, b: Option<f64>, omega: Option<f64>) {
        for p in [&mut self.sr, &mut self.se1, &mut self.sje1] {
            if let Some(b) = b {
                p.b = b;
            }
            if let Some(o) = omega {
                p.omega = o;
            }
        }
    }

    pub fn zeta(&self) -> f64 {
        self.sr.coefficients().upsilon + self.se1.coefficients().upsilon
    }

    pub fn chi(&self) -> f64 {
        self.sje1.coefficients().upsilon * self.zeta() / self.se1.coefficients().upsilon
    }

    pub fn theta(&self) -> f64 {
        self.d.o_coef() * self.e2.o_coef()
    }

    pub fn sigma_s(&self) -> f64 {
        self.power.sigma_s()
    }

    pub fn sigma_sj(&self) -> f64 {
        self.power.sigma_sj()
    }

    pub fn eps_i(&self) -> f64 {
        self.power.eps_i()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_valid() {
        let c = NetworkConfig::defaults(true);
        c.validate().unwrap();
        assert!((c.power.gs - 1e6).abs() < 1e-6);
        assert!(c.zeta() > 0.0 && c.chi() > 0.0);
        assert!(c.d.perturbations.is_empty());
    }
}
