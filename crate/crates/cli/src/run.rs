use std::io::Write as _;

use serde_json::{json, Map, Value};

use pointproc::cluster::{aggregate_to_grid, gi_star, space_time_scan, Baseline, ScanConfig};
use pointproc::io;
use pointproc::spatial::{
    csr_envelope, dispersion_by_block, evaluate_statistic, kde_surface, mean_min_distance, nni, quadrat_counts,
    simulate_csr, EdgeCorrection, EnvelopeStatistic,
};
use pointproc::temporal::{nhpp_mean, simulate_hawkes, simulate_hpp, simulate_nhpp, HawkesModel, IntensitySpec};
use pointproc::{Error, GridSpec, Region, Result, RngStream, SpaceTimeEvents, SpatialPattern};

use crate::args::{
    Analyze, Command, Correction, CurveArgs, Detect, IntensityKind, NhppArgs, PatternInput, RegionArg, ScanArgs,
    Simulate,
};

/// Everything a command produces, held in memory until it is committed.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: Map<String, Value>,
    pub warnings: Vec<String>,
}

impl Outputs {
    fn file(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    fn note(&mut self, key: &str, value: Value) {
        self.summary.insert(key.to_string(), value);
    }
}

fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

fn region(arg: &RegionArg) -> Result<Region> {
    match arg.region[..] {
        [xmin, xmax, ymin, ymax] => Region::new(xmin, xmax, ymin, ymax),
        _ => Err(param("--region needs four values xmin,xmax,ymin,ymax")),
    }
}

fn load_pattern(input: &PatternInput) -> Result<SpatialPattern> {
    SpatialPattern::new(io::read_points_file(&input.input)?, region(&input.region)?)
}

/// `a,b,c` or `start:end:count` (inclusive, evenly spaced).
pub fn parse_radii(s: &str) -> Result<Vec<f64>> {
    let bad = || param(format!("cannot parse radii '{s}'"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(bad());
        };
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        return match n {
            0 => Err(param("radius range needs a positive count")),
            1 => Ok(vec![a]),
            _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
        };
    }
    s.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect()
}

pub fn execute(cmd: &Command, seed: u64) -> Result<Outputs> {
    let mut rng = RngStream::new(seed);
    let mut out = Outputs::default();
    match cmd {
        Command::Simulate(s) => simulate(s, &mut rng, &mut out)?,
        Command::Analyze(a) => analyze(a, &mut rng, &mut out)?,
        Command::Detect(d) => detect(d, &mut rng, &mut out)?,
    }
    Ok(out)
}

fn intensity_spec(a: &NhppArgs) -> Result<IntensitySpec> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| param(format!("{flag} is required for this intensity")));
    Ok(match a.intensity {
        IntensityKind::Constant => IntensitySpec::Constant {
            rate: need(a.rate, "--rate")?,
        },
        IntensityKind::Piecewise => IntensitySpec::Piecewise {
            breakpoints: a.breakpoints.clone(),
            rates: a.rates.clone(),
        },
        IntensityKind::Sinusoid => IntensitySpec::Sinusoid {
            base: need(a.base, "--base")?,
            amplitude: need(a.amplitude, "--amplitude")?,
            period: need(a.period, "--period")?,
            segments: a.segments,
        },
    })
}

fn simulate(cmd: &Simulate, rng: &mut RngStream, out: &mut Outputs) -> Result<()> {
    match cmd {
        Simulate::Hpp { rate, horizon } => {
            let ev = simulate_hpp(*rate, *horizon, rng)?;
            out.note("n_events", json!(ev.len()));
            out.file("events.csv", |w| io::write_event_times(w, &ev))
        }
        Simulate::Nhpp(a) => {
            let f = intensity_spec(a)?.build(a.horizon)?;
            let ev = simulate_nhpp(&f, a.horizon, rng)?;
            out.note("n_events", json!(ev.len()));
            out.note("expected_events", json!(nhpp_mean(&f, 0.0, a.horizon)?));
            out.file("events.csv", |w| io::write_event_times(w, &ev))
        }
        Simulate::Hawkes {
            mu,
            alpha,
            beta,
            horizon,
        } => {
            let model = HawkesModel::exponential(*mu, *alpha, *beta)?;
            let sim = simulate_hawkes(&model, *horizon, rng)?;
            out.note("n_events", json!(sim.events.len()));
            out.note("n_star", json!(sim.branching.n_star));
            out.note("regime", json!(sim.branching.regime.to_string()));
            if let Some(w) = sim.warning() {
                out.warnings.push(w);
            }
            out.file("events.csv", |w| io::write_event_times(w, &sim.events))
        }
        Simulate::Csr { rate, region: r } => {
            let p = simulate_csr(*rate, &region(r)?, rng)?;
            out.note("n_points", json!(p.len()));
            out.file("points.csv", |w| io::write_points(w, p.points()))
        }
    }
}

fn curve(
    name: &str,
    args: &CurveArgs,
    stat: impl FnOnce(&SpatialPattern) -> Result<EnvelopeStatistic>,
    rng: &mut RngStream,
    out: &mut Outputs,
) -> Result<()> {
    let pattern = load_pattern(&args.pattern)?;
    let radii = parse_radii(&args.radii)?;
    let stat = stat(&pattern)?;
    let file = format!("{name}.csv");
    out.note("n_points", json!(pattern.len()));
    out.note("n_radii", json!(radii.len()));
    match args.envelope {
        Some(nsim) => {
            let env = csr_envelope(&pattern, &stat, &radii, nsim, rng)?;
            out.note("nsim", json!(nsim));
            out.note("escapes", json!(env.escapes().iter().filter(|&&e| e).count()));
            out.file(&file, |w| io::write_envelope(w, &env))
        }
        None => {
            let observed = evaluate_statistic(&stat, &pattern, &radii)?;
            out.file(&file, |w| io::write_curve(w, &radii, &observed))
        }
    }
}

fn analyze(cmd: &Analyze, rng: &mut RngStream, out: &mut Outputs) -> Result<()> {
    match cmd {
        Analyze::Kde {
            pattern,
            grid,
            bandwidth,
        } => {
            let p = load_pattern(pattern)?;
            let spec = GridSpec::new(*p.region(), grid.nx, grid.ny)?;
            let surface = kde_surface(&p, &spec, *bandwidth)?;
            let short = p.region().width().min(p.region().height());
            if *bandwidth > 0.25 * short {
                out.warnings.push(format!(
                    "bandwidth {bandwidth} is large relative to the region (shorter side {short}); \
                     cells near the boundary are biased low"
                ));
            }
            out.note("n_points", json!(p.len()));
            out.note("max_density", json!(surface.values.iter().cloned().fold(0.0, f64::max)));
            out.file("kde.csv", |w| io::write_density(w, &surface))
        }
        Analyze::G { curve: c } => curve("g", c, |_| Ok(EnvelopeStatistic::G), rng, out),
        Analyze::F {
            curve: c,
            probe_nx,
            probe_ny,
        } => curve(
            "f",
            c,
            |p| {
                Ok(EnvelopeStatistic::F {
                    probe: GridSpec::new(*p.region(), *probe_nx, *probe_ny)?,
                })
            },
            rng,
            out,
        ),
        Analyze::K { curve: c, correction } => {
            let correction = match correction {
                Correction::None => EdgeCorrection::None,
                Correction::Border => EdgeCorrection::Border,
            };
            curve("k", c, |_| Ok(EnvelopeStatistic::K { correction }), rng, out)
        }
        Analyze::Nni { pattern } => {
            let p = load_pattern(pattern)?;
            let d = mean_min_distance(&p)?;
            let v = nni(&p)?;
            out.note("n_points", json!(p.len()));
            out.note("mean_min_distance", json!(d));
            out.note("nni", json!(v));
            out.file("nni.csv", |w| {
                writeln!(w, "n,mean_min_distance,nni")?;
                writeln!(w, "{},{},{}", p.len(), io::fmt_num(d), io::fmt_num(v))?;
                Ok(())
            })
        }
        Analyze::Quadrat { pattern, grid } => {
            let p = load_pattern(pattern)?;
            let spec = GridSpec::new(*p.region(), grid.nx, grid.ny)?;
            let q = quadrat_counts(&p, &spec)?;
            out.note("chi_square", json!(q.chi_square));
            out.note("df", json!(q.df));
            out.note("p_value", json!(q.p_value));
            out.file("quadrat.csv", |w| io::write_count_grid(w, &q.grid))
        }
        Analyze::Dispersion { pattern, grid, blocks } => {
            let p = load_pattern(pattern)?;
            let spec = GridSpec::new(*p.region(), grid.nx, grid.ny)?;
            let d = dispersion_by_block(&p, &spec, blocks)?;
            out.file("dispersion.csv", |w| {
                writeln!(w, "block,index")?;
                for b in &d {
                    writeln!(w, "{},{}", b.block, io::fmt_num(b.index))?;
                }
                Ok(())
            })
        }
    }
}

fn scan(a: &ScanArgs, rng: &mut RngStream, out: &mut Outputs) -> Result<()> {
    let reg = region(&a.region)?;
    let events = SpaceTimeEvents::new(io::read_space_time_file(&a.input)?, reg, a.horizon)?;
    let baseline = match &a.baseline {
        None => Baseline::Uniform,
        Some(path) => {
            let (nx, ny) = a.baseline_nx.zip(a.baseline_ny).ok_or_else(|| {
                param("--baseline needs --baseline-nx and --baseline-ny")
            })?;
            let spec = GridSpec::new(reg, nx, ny)?;
            Baseline::grid(spec, io::read_baseline_file(path, &spec)?)?
        }
    };
    let config = ScanConfig {
        centres: GridSpec::new(reg, a.nx, a.ny)?,
        radii: a.radii.clone(),
        durations: a.durations.clone(),
        time_slices: a.slices,
        nsim: a.nsim as usize,
    };
    let results = space_time_scan(&events, &baseline, &config, rng)?;
    if let Some(top) = results.first() {
        out.note("top_cylinder", serde_json::to_value(top.cylinder)?);
        out.note("top_observed", json!(top.observed));
        out.note("top_llr", json!(top.llr));
        out.note("top_p_value", json!(top.p_value));
    }
    out.file("scan.csv", |w| io::write_scan(w, &results))
}

fn detect(cmd: &Detect, rng: &mut RngStream, out: &mut Outputs) -> Result<()> {
    match cmd {
        Detect::Gistar {
            pattern,
            grid,
            radius,
            threshold,
        } => {
            let p = load_pattern(pattern)?;
            let spec = GridSpec::new(*p.region(), grid.nx, grid.ny)?;
            let z = gi_star(&aggregate_to_grid(&p, &spec)?, *radius)?;
            out.note("hot_cells", json!(z.hot_cells(*threshold)));
            out.note("cold_cells", json!(z.cold_cells(*threshold)));
            out.note("max_z", json!(z.z.iter().cloned().fold(f64::NEG_INFINITY, f64::max)));
            out.file("gistar.csv", |w| io::write_zscores(w, &z))
        }
        Detect::Scan(a) => scan(a, rng, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_forms() {
        assert_eq!(parse_radii("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        let r = parse_radii("0.01:0.1:10").unwrap();
        assert_eq!(r.len(), 10);
        assert_eq!(r[0], 0.01);
        assert!((r[9] - 0.1).abs() < 1e-15);
        assert_eq!(parse_radii("0.5:1:1").unwrap(), vec![0.5]);
        assert!(parse_radii("0.1:0.2").is_err());
        assert!(parse_radii("a,b").is_err());
        assert!(parse_radii("0:1:0").is_err());
    }
}
