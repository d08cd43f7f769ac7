//! Published config schema: required fields, variant shapes and the full
//! default config of every subcommand.

use serde_json::{json, Value};

use crate::config::*;

fn defaults<T: serde::Serialize + Default>() -> Value {
    serde_json::to_value(T::default()).expect("defaults serialize")
}

pub fn schema() -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "rules": [
            "every config is a JSON object with an integer schema_version",
            "unknown fields are rejected",
            "omitted optional fields take the values under defaults",
            "complex numbers are [re, im] pairs; times in us, rates in 1/us",
            "--seed overrides the seed field"
        ],
        "shapes": {
            "state": [
                {"preset": {"amplitude": "0.25 | 0.30 | 0.35"}},
                {"prepare": {"params": "SystemParams", "t_c": "CatTime"}}
            ],
            "CatTime": [
                {"rule": "fixed", "t": "number"},
                {"rule": "half_revival"},
                {"rule": "purity_maximum"},
                {"rule": "revival_fraction", "fraction": "number"}
            ],
            "GridSpec": [
                {"kind": "slice", "im": "number", "lo": "number", "hi": "number", "n": "integer"},
                {"kind": "raster", "lo": "number", "hi": "number", "n": "integer"}
            ],
            "SystemParams": {
                "required": ["alpha0"],
                "optional": ["g0", "c_g", "c_e", "kappa_phonon", "gamma_qubit", "gamma_phi", "n_max"]
            },
            "ReadoutModel": {
                "required": ["contrast", "shots"],
                "optional": ["offset", "seed"]
            },
            "drive": [
                {"measured": {"samples": "[[amplitude, beta_abs], ...]"}},
                {"synthetic": {"b": "number", "c": "number", "amplitudes": "[number]", "noise": "number"}}
            ],
            "fock": [
                {"measured": {"times": "[number]", "p_e": "[number]"}},
                {"synthetic": {"beta": "number", "t_max": "number", "n_times": "integer", "shots": "integer"}}
            ],
            "method": ["auto", "exact", "lindblad"]
        },
        "defaults": {
            "simulate": defaults::<SimulateConfig>(),
            "qubit-phase-scan": defaults::<PhaseScanConfig>(),
            "wigner": defaults::<WignerConfig>(),
            "tomo": defaults::<TomoConfig>(),
            "decay": defaults::<DecayConfig>(),
            "mass": defaults::<MassConfig>(),
            "calibrate": defaults::<CalibrateConfig>(),
        }
    })
}
