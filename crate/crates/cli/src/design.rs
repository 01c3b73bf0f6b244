//! `design`: closed-form targets for the Tow-Thomas band-pass and the LNA.

use std::path::PathBuf;

use anyhow::Result;
use hfo_core::headstage::{
    lna_gain_db, towthomas_resistance_for, towthomas_response, LnaParams, TowThomasParams,
    LNA_FEEDBACK_CAPACITOR_F,
};
use serde::Serialize;

use crate::config;
use crate::failure;

const DEFAULT_C1_F: f64 = 10e-12;
const DEFAULT_F0_HZ: f64 = 80.0;
const DEFAULT_R2_OHM: f64 = 1e9;
const DEFAULT_INVERTER_OHM: f64 = 1e6;
const DEFAULT_LNA_GM_S: f64 = 20e-9;
const DEFAULT_LNA_LOAD_F: f64 = 20e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Unset integrator resistors are placed for `--f0`; an unset `r1` gives
/// unity gain.
#[derive(Debug, Clone, clap::Args)]
pub struct DesignArgs {
    #[arg(long, default_value_t = DEFAULT_C1_F)]
    pub c1: f64,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_R2_OHM)]
    pub r2: f64,
    #[arg(long)]
    pub r3: Option<f64>,
    #[arg(long)]
    pub r4: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_INVERTER_OHM)]
    pub r5: f64,
    #[arg(long, default_value_t = DEFAULT_INVERTER_OHM)]
    pub r6: f64,
    /// Target centre frequency for unset integrator resistors.
    #[arg(long, default_value_t = DEFAULT_F0_HZ)]
    pub f0: f64,
    /// LNA input capacitor; adds the LNA gain to the output.
    #[arg(long)]
    pub lna_cin: Option<f64>,
    #[arg(long, default_value_t = LNA_FEEDBACK_CAPACITOR_F)]
    pub lna_cf: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Also write design.json and a manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Design {
    pub f0: f64,
    pub gain: f64,
    pub bw: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lna_gain_db: Option<f64>,
}

#[derive(Serialize)]
struct DesignManifest<'a> {
    components: TowThomasParams,
    lna: Option<LnaParams>,
    format: &'a str,
}

pub fn compute(args: &DesignArgs) -> Result<(TowThomasParams, Option<LnaParams>, Design)> {
    if !(args.f0 > 0.0 && args.f0.is_finite()) {
        return Err(failure::config(format!("f0 {} must be positive", args.f0)));
    }
    let r = towthomas_resistance_for(args.f0, args.c1);
    let r4 = args.r4.unwrap_or(r);
    let p = TowThomasParams {
        r1: args.r1.unwrap_or(r4),
        r2: args.r2,
        r3: args.r3.unwrap_or(r),
        r4,
        r5: args.r5,
        r6: args.r6,
        c1: args.c1,
    };
    let resp = towthomas_response(&p).map_err(failure::as_config)?;
    let lna = args.lna_cin.map(|c_in| LnaParams {
        c_in,
        c_f: args.lna_cf,
        gm: DEFAULT_LNA_GM_S,
        c_load: DEFAULT_LNA_LOAD_F,
    });
    let lna_gain_db = lna
        .as_ref()
        .map(lna_gain_db)
        .transpose()
        .map_err(failure::as_config)?;
    let design = Design {
        f0: resp.f0_hz,
        gain: resp.gain_linear,
        bw: resp.bw_hz,
        lna_gain_db,
    };
    Ok((p, lna, design))
}

pub fn render(d: &Design, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(d)? + "\n",
        Format::Text => {
            let mut s = format!(
                "f0    {:.4} Hz\ngain  {:.6}\nbw    {:.4} Hz\n",
                d.f0, d.gain, d.bw
            );
            if let Some(g) = d.lna_gain_db {
                s.push_str(&format!("lna   {g:.2} dB\n"));
            }
            s
        }
    })
}

pub fn run(args: &DesignArgs) -> Result<()> {
    let (components, lna, design) = compute(args)?;
    print!("{}", render(&design, args.format)?);
    if let Some(out) = &args.out {
        config::create_dir(out)?;
        config::write_json(&out.join("design.json"), &design)?;
        let format = match args.format {
            Format::Text => "text",
            Format::Json => "json",
        };
        config::write_manifest(
            out,
            "design",
            &DesignManifest {
                components,
                lna,
                format,
            },
        )?;
    }
    Ok(())
}
