//! SNRs of the underlay links, secrecy capacity and the intercept indicator.

use serde::{Deserialize, Serialize};

/// Power budget in linear units. `gs`, `gsj`: peak source and jammer SNRs, `gi`: tolerated
/// interference at the primary receiver, `gth`: decoding threshold of the relay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub gs: f64,
    pub gsj: f64,
    pub gi: f64,
    pub gth: f64,
    pub jammer_on: bool,
}

impl PowerConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("gamma_s", self.gs), ("gamma_sj", self.gsj), ("gamma_i", self.gi), ("gamma_th", self.gth)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("{name} must be finite and positive, got {v}"));
            }
        }
        Ok(())
    }

    /// Interference-gain level above which the source is capped by the primary receiver.
    pub fn sigma_s(&self) -> f64 {
        self.gi / self.gs
    }

    pub fn sigma_sj(&self) -> f64 {
        self.gi / self.gsj
    }

    pub fn eps_i(&self) -> f64 {
        self.gth / self.gi
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GainDraw {
    pub g_sp: f64,
    pub g_sjp: f64,
    pub g_sr: f64,
    pub g_se1: f64,
    pub g_sje1: f64,
    pub snr_d: f64,
    pub snr_e2: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SnrDraw {
    pub r: f64,
    pub e1: f64,
    pub d: f64,
    pub e2: f64,
}

/// min(peak, cap / g) with g = 0 resolving to the peak.
pub fn underlay_power(peak: f64, cap: f64, g: f64) -> f64 {
    if g <= 0.0 {
        peak
    } else {
        peak.min(cap / g)
    }
}

pub fn snr_relay(pc: &PowerConfig, g_sr: f64, g_sp: f64) -> f64 {
    underlay_power(pc.gs, pc.gi, g_sp) * g_sr
}

pub fn snr_eve1(pc: &PowerConfig, g_se1: f64, g_sp: f64, g_sje1: f64, g_sjp: f64) -> f64 {
    let us = underlay_power(pc.gs, pc.gi, g_sp) * g_se1;
    if !pc.jammer_on {
        return us;
    }
    let usj = underlay_power(pc.gsj, pc.gi, g_sjp) * g_sje1;
    us / (usj + 1.0)
}

/// The optical SNR draw is already the link SNR; the optical hop has no interference cap.
pub fn snr_optical(raw: f64) -> f64 {
    raw
}

pub fn snrs(pc: &PowerConfig, g: &GainDraw) -> SnrDraw {
    SnrDraw {
        r: snr_relay(pc, g.g_sr, g.g_sp),
        e1: snr_eve1(pc, g.g_se1, g.g_sp, g.g_sje1, g.g_sjp),
        d: snr_optical(g.snr_d),
        e2: snr_optical(g.snr_e2),
    }
}

/// Secrecy capacity of the decode-and-forward chain; zero when the relay cannot decode.
pub fn secrecy_capacity(s: &SnrDraw, gth: f64) -> f64 {
    if s.r < gth {
        return 0.0;
    }
    let c1 = ((1.0 + s.r) / (1.0 + s.e1)).log2();
    let c2 = ((1.0 + s.r) / (1.0 + s.e2)).log2().min(((1.0 + s.d) / (1.0 + s.e2)).log2());
    c1.min(c2)
}

pub fn intercepted(s: &SnrDraw, gth: f64) -> bool {
    s.r < gth || secrecy_capacity(s, gth) <= 0.0
}

pub fn e2e_snr(s: &SnrDraw) -> f64 {
    s.r.min(s.d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pc(jammer_on: bool) -> PowerConfig {
        PowerConfig { gs: 100.0, gsj: 10.0, gi: 10.0, gth: 0.5, jammer_on }
    }

    #[test]
    fn relay_examples() {
        assert!((snr_relay(&pc(false), 0.3, 0.5) - 6.0).abs() < 1e-12);
        assert_eq!(snr_relay(&pc(false), 0.3, 0.0), 30.0);
        assert_eq!(snr_relay(&pc(false), 0.0, 0.5), 0.0);
    }

    #[test]
    fn eve_examples() {
        assert!((snr_eve1(&pc(false), 0.2, 0.5, 1.0, 1.0) - 4.0).abs() < 1e-12);
        // U_SJ = min(10, 10/1) * 0.3 = 3
        assert!((snr_eve1(&pc(true), 0.2, 0.5, 0.3, 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(snr_eve1(&pc(true), 0.2, 0.5, 0.0, 1.0), snr_eve1(&pc(false), 0.2, 0.5, 0.0, 1.0));
    }

    #[test]
    fn capacity_examples() {
        let s = SnrDraw { r: 3.0, e1: 1.0, d: 7.0, e2: 1.0 };
        assert!((secrecy_capacity(&s, 0.5) - 1.0).abs() < 1e-12);
        let t = SnrDraw { e1: 3.0, ..s };
        assert!(secrecy_capacity(&t, 0.5) <= 0.0);
        assert!(intercepted(&t, 0.5));
        assert_eq!(secrecy_capacity(&s, 4.0), 0.0);
        assert_eq!(e2e_snr(&SnrDraw { r: 3.0, d: 7.0, ..s }), 3.0);
        assert_eq!(e2e_snr(&SnrDraw { r: 7.0, d: 3.0, ..s }), 3.0);
        assert_eq!(e2e_snr(&SnrDraw { r: 2.5, d: 2.5, ..s }), 2.5);
    }

    fn gains() -> impl Strategy<Value = GainDraw> {
        (0.0..5.0f64, 0.0..5.0f64, 0.0..20.0f64, 0.0..20.0f64, 0.0..20.0f64, 0.0..1e4f64, 0.0..1e3f64).prop_map(
            |(a, b, c, d, e, f, g)| GainDraw { g_sp: a, g_sjp: b, g_sr: c, g_se1: d, g_sje1: e, snr_d: f, snr_e2: g },
        )
    }

    fn powers() -> impl Strategy<Value = PowerConfig> {
        (0.1..1e6f64, 0.1..1e3f64, 0.1..1e3f64, 0.01..10.0f64)
            .prop_map(|(gs, gsj, gi, gth)| PowerConfig { gs, gsj, gi, gth, jammer_on: false })
    }

    proptest! {
        #[test]
        fn jammer_never_hurts(g in gains(), p in powers()) {
            let off = snrs(&p, &g);
            let on = snrs(&PowerConfig { jammer_on: true, ..p }, &g);
            prop_assert!(on.e1 <= off.e1);
            prop_assert!(secrecy_capacity(&on, p.gth) >= secrecy_capacity(&off, p.gth));
            prop_assert!(intercepted(&on, p.gth) <= intercepted(&off, p.gth));
        }

        #[test]
        fn underlay_cap(g in gains(), p in powers()) {
            let r = snr_relay(&p, g.g_sr, g.g_sp);
            prop_assert!(r <= p.gs * g.g_sr * (1.0 + 1e-12));
            if g.g_sp > 0.0 {
                prop_assert!(r <= p.gi / g.g_sp * g.g_sr * (1.0 + 1e-12));
            }
        }

        #[test]
        fn saturation(g in gains(), p in powers(), k in 1.0..100.0f64) {
            prop_assume!(g.g_sp > 1e-3);
            // beyond gs > gi / g_sp the relay SNR no longer depends on gs
            let base = PowerConfig { gs: 2.0 * p.gi / g.g_sp, ..p };
            let more = PowerConfig { gs: k * base.gs, ..p };
            prop_assert_eq!(snr_relay(&base, g.g_sr, g.g_sp), snr_relay(&more, g.g_sr, g.g_sp));
            let base = PowerConfig { gi: 2.0 * p.gs * g.g_sp, ..p };
            let more = PowerConfig { gi: k * base.gi, ..p };
            prop_assert_eq!(snr_relay(&base, g.g_sr, g.g_sp), snr_relay(&more, g.g_sr, g.g_sp));
        }

        #[test]
        fn capacity_monotone(r in 0.0..100.0f64, e1 in 0.0..100.0f64, d in 0.0..100.0f64, e2 in 0.0..100.0f64, bump in 0.0..10.0f64) {
            let gth = 1.0;
            // the decode gate maps r < gth to 0 even where the log-ratio would be negative,
            // so monotonicity in r is only meaningful above the gate
            prop_assume!(r >= gth);
            let s = SnrDraw { r, e1, d, e2 };
            let c = secrecy_capacity(&s, gth);
            let up_r = SnrDraw { r: r + bump, ..s };
            let up_d = SnrDraw { d: d + bump, ..s };
            let up_e1 = SnrDraw { e1: e1 + bump, ..s };
            let up_e2 = SnrDraw { e2: e2 + bump, ..s };
            prop_assert!(secrecy_capacity(&up_r, gth) >= c);
            prop_assert!(secrecy_capacity(&up_d, gth) >= c);
            prop_assert!(secrecy_capacity(&up_e1, gth) <= c || c == 0.0);
            prop_assert!(secrecy_capacity(&up_e2, gth) <= c || c == 0.0);
        }
    }
}
