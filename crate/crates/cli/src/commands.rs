use std::path::Path;

use qcap_core::capacity::{generalized_capacity, CapacityOptions};
use qcap_core::channel::QuantumChannel;
use qcap_core::info::{coherent_information, generalized_information, CQEnsemble};
use qcap_core::io::{curve_csv, named_channel, report_json, ChannelSpec, CurveReport, EnsembleSpec, KidReport, StateSpec};
use qcap_core::ki::ki_decompose;
use qcap_core::measures;
use qcap_core::optimize::OptimizerOptions;
use qcap_core::random::rng_from_seed;
use qcap_core::state::DensityMatrix;
use qcap_core::tradeoff::{chebyshev_grid, compute_curve, CurveOptions};

use crate::args::{Budget, CapacityArgs, CurveArgs, Format, InfoArgs, KidArgs};
use crate::reports::{ChannelInfo, EnsembleInfo, InfoReport, StateInfo, SubsystemEntropy};
use crate::{emit, CliError, CliResult};

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

/// Prefixes parse and validation errors with the offending file.
fn in_file<T>(path: &Path, r: qcap_core::error::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        e if e.is_numerical() => CliError::Core(e),
        e => CliError::Invalid(format!("{}: {e}", path.display())),
    })
}

pub fn load_state(path: &Path) -> CliResult<DensityMatrix> {
    in_file(path, StateSpec::parse(&read(path)?))
}

pub fn load_ensemble(path: &Path) -> CliResult<CQEnsemble> {
    in_file(path, EnsembleSpec::parse(&read(path)?))
}

/// A channel file when `spec` names an existing file, a built-in channel otherwise.
pub fn load_channel(spec: &str) -> CliResult<QuantumChannel> {
    let path = Path::new(spec);
    if path.is_file() {
        in_file(path, ChannelSpec::parse(&read(path)?))
    } else {
        Ok(named_channel(spec)?)
    }
}

fn positive(name: &str, v: usize) -> CliResult<usize> {
    if v == 0 {
        return Err(CliError::Invalid(format!("--{name} must be positive")));
    }
    Ok(v)
}

fn curve_options(b: &Budget) -> CliResult<CurveOptions> {
    Ok(CurveOptions {
        optimizer: OptimizerOptions {
            restarts: positive("restarts", b.restarts)?,
            max_iters: b.iters,
            seed: b.seed,
            ..Default::default()
        },
        warm_start: None,
    })
}

fn state_info(rho: &DensityMatrix, a: &str, channel: Option<&QuantumChannel>) -> CliResult<StateInfo> {
    let space = rho.space();
    space.position(a)?;
    let rest: Vec<&str> = space.labels().filter(|l| *l != a).collect();
    let marginals = space
        .labels()
        .map(|l| Ok(SubsystemEntropy { label: l.to_string(), entropy: rho.partial_trace(&[l])?.entropy() }))
        .collect::<qcap_core::error::Result<Vec<_>>>()?;
    let (mutual_information, conditional_entropy) = if rest.is_empty() {
        (None, None)
    } else {
        (Some(measures::mutual_information(rho, &[a], &rest)?), Some(measures::conditional_entropy(rho, &rest, &[a])?))
    };
    let coherent_information = match channel {
        Some(ch) => Some(coherent_information(&rho.partial_trace(&[a])?, ch)?),
        None => None,
    };
    Ok(StateInfo {
        dims: space.subsystems().to_vec(),
        entropy: rho.entropy(),
        marginals,
        source: a.to_string(),
        mutual_information,
        conditional_entropy,
        coherent_information,
    })
}

pub fn info(args: &InfoArgs) -> CliResult<()> {
    if args.state.is_none() && args.ensemble.is_none() {
        return Err(CliError::Invalid("info needs --state or --ensemble".into()));
    }
    let channel = args.channel.as_deref().map(load_channel).transpose()?;
    let state = match &args.state {
        Some(p) => Some(state_info(&load_state(p)?, &args.a_label, channel.as_ref())?),
        None => None,
    };
    let ensemble = match &args.ensemble {
        Some(p) => {
            let ens = load_ensemble(p)?;
            let ch = channel.as_ref().ok_or_else(|| CliError::Invalid("--ensemble needs --channel".into()))?;
            let g = generalized_information(&ens, ch)?;
            Some(EnsembleInfo { dim_A: ens.dim_a(), dim_R: ens.dim_r(), entries: ens.len(), r_c: g.r_c, r_q: g.r_q, i_g: g.i_g })
        }
        None => None,
    };
    let channel = channel.map(|ch| ChannelInfo { dim_in: ch.dim_in(), dim_out: ch.dim_out(), kraus: ch.kraus().len() });
    emit(&report_json(&InfoReport { channel, state, ensemble }), args.out.as_deref())
}

pub fn kid(args: &KidArgs) -> CliResult<()> {
    let rho = load_state(&args.state)?;
    let kid = ki_decompose(&rho, &args.a_label, &mut rng_from_seed(args.seed))?;
    emit(&KidReport::new(&kid).to_json(), args.out.as_deref())
}

pub fn curve(args: &CurveArgs) -> CliResult<()> {
    let ch = load_channel(&args.channel)?;
    let level = positive("level", args.level)?;
    let grid = chebyshev_grid(positive("grid", args.grid)?);
    let curve = compute_curve(&ch, level, &grid, &curve_options(&args.budget)?)?;
    curve.validate()?;
    let json_by_name = args.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
    let text = match args.format {
        Some(Format::Json) => CurveReport::new(&curve).to_json(),
        Some(Format::Csv) => curve_csv(&curve),
        None if json_by_name => CurveReport::new(&curve).to_json(),
        None => curve_csv(&curve),
    };
    emit(&text, args.out.as_deref())
}

pub fn capacity(args: &CapacityArgs) -> CliResult<()> {
    let rho = load_state(&args.state)?;
    let ch = load_channel(&args.channel)?;
    let opts = CapacityOptions {
        curve: curve_options(&args.budget)?,
        grid: chebyshev_grid(positive("grid", args.grid)?),
        ki_seed: args.budget.seed,
    };
    let (report, _, _) = generalized_capacity(&rho, &args.a_label, &ch, positive("level", args.level)?, &opts)?;
    emit(&report_json(&report), args.out.as_deref())
}
