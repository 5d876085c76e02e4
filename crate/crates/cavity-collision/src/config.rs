//! Flat `key = value` run configuration with `#` comments, plus the config
//! hash echoed into every output table.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{CollisionScenario, PhysicalSetup};
use crate::measurement::DetectionModel;

/// All setup, scenario, sweep and detection parameters as one flat document.
///
/// Frequencies are entered in Hz (`omega_hz`, `mode_splitting_hz`,
/// `delta_a_hz`); angular frequencies are derived internally.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_principal: u32,
    pub omega_hz: f64,
    pub mirror_spacing_m: f64,
    pub waist_m: f64,
    pub mode_splitting_hz: f64,

    pub v1_m_per_s: f64,
    pub v2_m_per_s: f64,
    pub delta_a_hz: f64,
    pub nbar: f64,
    pub n_fock_mix: usize,
    pub n_fock_dyn: usize,
    /// Integration half-window in units of `w / min(v1, v2)`.
    pub t_span_factor: f64,
    pub dt_s: f64,

    pub eta_min: f64,
    pub eta_max: f64,
    pub n_points: usize,
    pub include_eta_zero_reference: bool,

    /// `scale` or `matrix`.
    pub detection_mode: String,
    pub detection_scale: f64,
    pub detection_misassign: f64,

    pub bell_v1_m_per_s: f64,
    pub bell_v2_m_per_s: f64,
    pub bell_n_phases: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_principal: 51,
            omega_hz: 51.1e9,
            mirror_spacing_m: 0.0275,
            waist_m: 0.006,
            mode_splitting_hz: 128e3,
            v1_m_per_s: 300.0,
            v2_m_per_s: 243.0,
            delta_a_hz: 470e3,
            nbar: 0.25,
            n_fock_mix: 3,
            n_fock_dyn: 5,
            t_span_factor: 4.0,
            dt_s: 2e-9,
            eta_min: 5e4,
            eta_max: 3e6,
            n_points: 40,
            include_eta_zero_reference: true,
            detection_mode: "scale".into(),
            detection_scale: 0.89,
            detection_misassign: 0.05,
            bell_v1_m_per_s: 500.0,
            bell_v2_m_per_s: 319.0,
            bell_n_phases: 81,
        }
    }
}

macro_rules! config_keys {
    ($($key:ident),* $(,)?) => {
        fn set_key(cfg: &mut RunConfig, key: &str, value: &str, line: usize) -> Result<()> {
            match key {
                $(stringify!($key) => {
                    cfg.$key = value.parse().map_err(|_| Error::Config(format!(
                        "line {line}: cannot parse value {value:?} for key {key:?}"
                    )))?;
                    Ok(())
                })*
                _ => Err(Error::Config(format!("line {line}: unknown key {key:?}"))),
            }
        }

        fn serialize_config(cfg: &RunConfig) -> String {
            let mut out = String::new();
            $(out.push_str(&format!("{} = {}\n", stringify!($key), cfg.$key));)*
            out
        }
    };
}

config_keys!(
    n_principal,
    omega_hz,
    mirror_spacing_m,
    waist_m,
    mode_splitting_hz,
    v1_m_per_s,
    v2_m_per_s,
    delta_a_hz,
    nbar,
    n_fock_mix,
    n_fock_dyn,
    t_span_factor,
    dt_s,
    eta_min,
    eta_max,
    n_points,
    include_eta_zero_reference,
    detection_mode,
    detection_scale,
    detection_misassign,
    bell_v1_m_per_s,
    bell_v2_m_per_s,
    bell_n_phases,
);

impl RunConfig {
    /// Parse a flat `key = value` document over the defaults. Unknown keys
    /// are rejected with their line number.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value', got {raw:?}", i + 1))
            })?;
            set_key(&mut cfg, key.trim(), value.trim(), i + 1)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical serialization; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        serialize_config(self)
    }

    /// Apply one `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (key, value) = kv.split_once('=').ok_or_else(|| {
            Error::Config(format!("override must be key=value, got {kv:?}"))
        })?;
        set_key(self, key.trim(), value.trim(), 0)
    }

    /// Short hash of the canonical serialization, echoed in output files.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.serialize().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.detection_mode != "scale" && self.detection_mode != "matrix" {
            return Err(Error::Config(format!(
                "detection_mode must be 'scale' or 'matrix', got {:?}",
                self.detection_mode
            )));
        }
        if self.n_points == 0 || self.bell_n_phases < 2 {
            return Err(Error::Config(
                "n_points must be >= 1 and bell_n_phases >= 2".into(),
            ));
        }
        if !(self.eta_min > 0.0 && self.eta_max > self.eta_min) {
            return Err(Error::Config("require 0 < eta_min < eta_max".into()));
        }
        self.detection_model().validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn setup(&self) -> Result<PhysicalSetup> {
        use std::f64::consts::TAU;
        PhysicalSetup::new(
            self.n_principal,
            TAU * self.omega_hz,
            self.mirror_spacing_m,
            self.waist_m,
            TAU * self.mode_splitting_hz,
        )
    }

    /// Scenario at the configured sweep velocities and a given detuning.
    pub fn scenario(&self, setup: &PhysicalSetup, delta_a: f64) -> Result<CollisionScenario> {
        self.scenario_at(setup, self.v1_m_per_s, self.v2_m_per_s, delta_a)
    }

    pub fn scenario_at(
        &self,
        setup: &PhysicalSetup,
        v1: f64,
        v2: f64,
        delta_a: f64,
    ) -> Result<CollisionScenario> {
        let mut s = CollisionScenario {
            v1,
            v2,
            delta_a,
            nbar: self.nbar,
            n_fock_mix: self.n_fock_mix,
            n_fock_dyn: self.n_fock_dyn,
            t_span: self.t_span_factor * setup.waist / v2.min(v1),
            dt: self.dt_s,
            coupling_scale: 1.0,
        };
        s.dt = s.stable_dt(setup, self.dt_s);
        s.validate(setup)?;
        Ok(s)
    }

    pub fn detection_model(&self) -> DetectionModel {
        if self.detection_mode == "matrix" {
            DetectionModel::Confusion {
                misassign: self.detection_misassign,
            }
        } else {
            DetectionModel::Scale(self.detection_scale)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let text = cfg.serialize();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash(), back.hash());
    }

    #[test]
    fn parse_with_comments_and_overrides() {
        let cfg = RunConfig::parse(
            "# sweep range\n\
             eta_min = 1e5   # lower edge\n\
             nbar = 0\n\
             detection_mode = matrix\n",
        )
        .unwrap();
        assert_eq!(cfg.eta_min, 1e5);
        assert_eq!(cfg.nbar, 0.0);
        assert!(matches!(
            cfg.detection_model(),
            DetectionModel::Confusion { .. }
        ));
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let err = RunConfig::parse("waist_m = 0.006\nbogus_key = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("bogus_key"), "{msg}");
    }

    #[test]
    fn bad_value_and_bad_mode_rejected() {
        assert!(RunConfig::parse("nbar = abc\n").is_err());
        assert!(RunConfig::parse("detection_mode = telepathy\n").is_err());
        assert!(RunConfig::parse("eta_min = -5\n").is_err());
    }

    #[test]
    fn override_changes_hash() {
        let mut cfg = RunConfig::default();
        let h0 = cfg.hash();
        cfg.apply_override("delta_a_hz=250e3").unwrap();
        assert_ne!(h0, cfg.hash());
        assert!(cfg.apply_override("no_such=1").is_err());
        assert!(cfg.apply_override("malformed").is_err());
    }

    #[test]
    fn scenario_derivation() {
        let cfg = RunConfig::default();
        let setup = cfg.setup().unwrap();
        let s = cfg.scenario(&setup, std::f64::consts::TAU * 470e3).unwrap();
        assert!((s.t_span - 4.0 * 0.006 / 243.0).abs() < 1e-12);
        assert!(s.dt <= 2e-9);
    }
}
