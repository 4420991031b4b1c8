//! Noise-spec mini-grammar.
//!
//! ```text
//! spec    := channel [ "@" target ]
//! channel := "depolarizing:" p
//!          | "pauli:" px "," py "," pz
//!          | "amp_damp:" gamma
//!          | "unitary:" axis "," theta
//!          | "dual:" channel
//! target  := "two" | "inverse" | "single"
//! ```
//!
//! Without a target the channel follows every `U_zz`. `@inverse` replaces it
//! on the mirrored half and `@single` places it after single-qubit gates.

use mirror_bench::channels::ChannelParams;
use mirror_bench::simulator::NoiseModel;

fn number(s: &str, what: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("{what}: expected a number, got {s:?}"))
}

pub fn parse_channel(s: &str) -> Result<ChannelParams, String> {
    let (kind, args) = s
        .split_once(':')
        .ok_or_else(|| format!("noise spec {s:?} needs the form <kind>:<args>"))?;
    let params = match kind.trim() {
        "depolarizing" => ChannelParams::Depolarizing {
            p: number(args, "depolarizing")?,
        },
        "pauli" => {
            let probs = args
                .split(',')
                .map(|v| number(v, "pauli"))
                .collect::<Result<Vec<_>, _>>()?;
            if probs.len() != 3 {
                return Err(format!("pauli needs exactly pX,pY,pZ, got {args:?}"));
            }
            ChannelParams::StochasticPauli { probs }
        }
        "amp_damp" => ChannelParams::AmplitudeDamping {
            gamma: number(args, "amp_damp")?,
        },
        "unitary" => {
            let (axis, theta) = args
                .split_once(',')
                .ok_or_else(|| format!("unitary needs <axis>,<theta>, got {args:?}"))?;
            ChannelParams::UnitaryError {
                axis: axis.trim().parse().map_err(|e| format!("unitary axis: {e}"))?,
                theta: number(theta, "unitary")?,
            }
        }
        "dual" => ChannelParams::InverseHalf {
            of: Box::new(parse_channel(args)?),
        },
        other => return Err(format!("unknown noise kind {other:?}")),
    };
    params.validate().map_err(|e| e.to_string())?;
    Ok(params)
}

/// Builds a noise model from repeated `--noise` specs.
pub fn parse_noise(specs: &[String]) -> Result<NoiseModel, String> {
    let mut model = NoiseModel::ideal();
    for spec in specs {
        let (channel, target) = match spec.rsplit_once('@') {
            Some((c, t)) => (c, t.trim()),
            None => (spec.as_str(), "two"),
        };
        let params = parse_channel(channel)?;
        let slot = match target {
            "two" => &mut model.two_qubit,
            "inverse" => &mut model.inverse_half_override,
            "single" => &mut model.single_qubit,
            other => return Err(format!("unknown noise target @{other}")),
        };
        if slot.replace(params).is_some() {
            return Err(format!("noise target @{target} given twice"));
        }
    }
    Ok(model)
}
