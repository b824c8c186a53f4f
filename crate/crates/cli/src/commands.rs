use crate::{Analyze, Bench, Cli, Command, FidelityArgs, ModeArg, PlanArg, PrecisionArg, Source};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rqcsim::amplitude::{amplitude, amplitude_batch, AmplitudeRecord, EngineOptions, FidelitySpec, Precision};
use rqcsim::analysis::{linear_xeb, pearson_from_batches, porter_thomas_check, xeb_fidelity};
use rqcsim::bits::{format_bits, parse_bits, random_bits, to_index, zeros, Bits};
use rqcsim::circuits::{generate_rqc, parse_circuit, write_circuit, Circuit, DepthSpec, Lattice};
use rqcsim::oracle::{exact_amplitudes, exact_distribution};
use rqcsim::partition::{complexity_csv, complexity_table, Scheme};
use rqcsim::plan::{builtin_plan, ContractionPlan, ExecOptions};
use rqcsim::sampler::{sample_circuit, EngineBatches, SamplerConfig};
use rqcsim::tensor::{benchmark_permute, BenchRow};
use serde_json::json;
use std::fmt;
use std::io::{BufWriter, Write};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(rqcsim::Error),
}

impl CliError {
    /// 1 for bad input, 2 for numerical or resource failures.
    pub fn exit_code(&self) -> u8 {
        use rqcsim::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(E::Budget { .. } | E::Resource(_) | E::TooManyQubits(..) | E::Numerical(_) | E::Io(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<rqcsim::Error> for CliError {
    fn from(e: rqcsim::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

/// Settings resolved from the global flags.
struct Ctx<'a> {
    cli: &'a Cli,
    threads: usize,
    out: BufWriter<std::io::Stdout>,
}

impl Ctx<'_> {
    fn config(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self.cli).expect("arguments serialize");
        v["threads"] = json!(self.threads);
        v
    }

    /// First line of JSON-lines output.
    fn json_header(&mut self) -> Result<()> {
        let line = json!({ "config": self.config() });
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    /// First line of CSV output.
    fn csv_header(&mut self) -> Result<()> {
        let cfg = self.config();
        writeln!(self.out, "# config: {cfg}")?;
        Ok(())
    }

    fn engine(&self) -> EngineOptions {
        EngineOptions {
            precision: match self.cli.precision {
                PrecisionArg::Single => Precision::Single,
                PrecisionArg::Double => Precision::Double,
            },
            exec: ExecOptions { reuse: true, memory_budget: self.cli.memory_budget, threads: self.threads },
        }
    }

    fn plan(&self, arg: &PlanArg, c: &Circuit) -> Result<ContractionPlan> {
        if arg.plan == "auto" {
            let scalar = match self.cli.precision {
                PrecisionArg::Single => 8,
                PrecisionArg::Double => 16,
            };
            return Ok(builtin_plan(&c.lattice, c.depth, self.cli.memory_budget.map(|b| b / scalar))?);
        }
        Ok(ContractionPlan::parse(&std::fs::read_to_string(&arg.plan)?, &c.lattice)?)
    }

    fn fidelity(&self, f: &FidelityArgs) -> Result<FidelitySpec> {
        let spec = match f.mode {
            ModeArg::Exact if f.fidelity != 1.0 => return usage("--fidelity needs --mode fraction or mixed"),
            ModeArg::Exact => FidelitySpec::exact(),
            ModeArg::Fraction => FidelitySpec::path_fraction(f.fidelity, self.cli.seed),
            ModeArg::Mixed => FidelitySpec::mixed(f.fidelity, self.cli.seed),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn load(source: &Source, seed: u64) -> Result<Circuit> {
    match (&source.circuit, &source.lattice, &source.depth) {
        (Some(path), None, None) => Ok(parse_circuit(&std::fs::read_to_string(path)?, None)?),
        (None, Some(l), Some(d)) => Ok(generate_rqc(&Lattice::from_spec(l)?, DepthSpec::parse(d)?, seed)?),
        _ => usage("give either --circuit or both --lattice and --depth"),
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let threads = match cli.threads {
        0 => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        t => t,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} workers: {e}")))?;
    let mut ctx = Ctx { cli, threads, out: BufWriter::new(std::io::stdout()) };
    pool.install(|| dispatch(&mut ctx))?;
    ctx.out.flush()?;
    Ok(())
}

fn dispatch(ctx: &mut Ctx) -> Result<()> {
    let seed = ctx.cli.seed;
    match &ctx.cli.command {
        Command::Gen { source, output } => {
            if source.circuit.is_some() {
                return usage("gen needs --lattice and --depth");
            }
            let text = write_circuit(&load(source, seed)?);
            match output {
                Some(p) => std::fs::write(p, text)?,
                None => ctx.out.write_all(text.as_bytes())?,
            }
        }
        Command::Amplitude { source, plan, fidelity, input, outputs, s_ab, n_c, oracle } => {
            let c = load(source, seed)?;
            let plan = ctx.plan(plan, &c)?;
            let spec = ctx.fidelity(fidelity)?;
            let opts = ctx.engine();
            let input = match input {
                Some(s) => parse_bits(s)?,
                None => zeros(c.n()),
            };
            let mut records = Vec::new();
            if let Some(s_ab) = s_ab {
                let b = amplitude_batch(&c, &input, &parse_bits(s_ab)?, &plan.batch, *n_c, &plan, &spec, seed, &opts)?;
                for e in &b.entries {
                    records.push((e.out.clone(), AmplitudeRecord::new(&input, &e.out, e.amplitude, &b.stats, seed)));
                }
            } else {
                if outputs.is_empty() {
                    return usage("give --out strings or --s-ab for a batch");
                }
                for o in outputs {
                    let out = parse_bits(o)?;
                    let (a, stats) = amplitude(&c, &input, &out, &plan, &spec, &opts)?;
                    records.push((out.clone(), AmplitudeRecord::new(&input, &out, a, &stats, seed)));
                }
            }
            let exact = if *oracle {
                let outs: Vec<Bits> = records.iter().map(|r| r.0.clone()).collect();
                Some(exact_amplitudes(&c, &input, &outs)?)
            } else {
                None
            };
            ctx.json_header()?;
            for (i, (out, r)) in records.iter().enumerate() {
                writeln!(ctx.out, "{}", r.to_json())?;
                if let Some(ex) = &exact {
                    writeln!(ctx.out, "{}", AmplitudeRecord::from_oracle(&input, out, ex[i]).to_json())?;
                }
            }
        }
        Command::Sample { source, plan, fidelity, samples, m, n_c } => {
            let c = load(source, seed)?;
            let plan = ctx.plan(plan, &c)?;
            let cfg = SamplerConfig { m: *m, n_c: *n_c, target_samples: *samples, seed, fidelity: ctx.fidelity(fidelity)? };
            let (run, footer) = sample_circuit(&c, &plan, &zeros(c.n()), &cfg, &ctx.engine())?;
            ctx.json_header()?;
            for s in &run.samples {
                writeln!(ctx.out, "{}", json!({ "sample": format_bits(s) }))?;
            }
            writeln!(ctx.out, "{}", json!({ "footer": footer }))?;
        }
        Command::Verify { source, plan, samples, tolerance } => {
            let c = load(source, seed)?;
            let plan = ctx.plan(plan, &c)?;
            let opts = ctx.engine();
            let tol = tolerance.unwrap_or(match ctx.cli.precision {
                PrecisionArg::Single => 1e-5,
                PrecisionArg::Double => 1e-10,
            });
            let input = zeros(c.n());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let outs: Vec<Bits> = (0..*samples).map(|_| random_bits(c.n(), &mut rng)).collect();
            let want = exact_amplitudes(&c, &input, &outs)?;
            let mut max_abs: f64 = 0.0;
            let mut worst = 0;
            for (i, (o, w)) in outs.iter().zip(&want).enumerate() {
                let (a, _) = amplitude(&c, &input, o, &plan, &FidelitySpec::exact(), &opts)?;
                let d = (a - w).norm();
                if d > max_abs {
                    max_abs = d;
                    worst = i;
                }
            }
            let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pass = max_abs <= tol;
            let report = json!({
                "config": ctx.config(),
                "samples": samples,
                "max_abs_diff": max_abs,
                "max_rel_diff": if scale > 0.0 { max_abs / scale } else { 0.0 },
                "worst_out": outs.get(worst).map(|o| format_bits(o)),
                "tolerance": tol,
                "pass": pass,
            });
            writeln!(ctx.out, "{report}")?;
            if !pass {
                ctx.out.flush()?;
                return Err(rqcsim::Error::Numerical(format!("max |difference| {max_abs:e} above {tol:e}")).into());
            }
        }
        Command::Analyze { what } => analyze(ctx, what)?,
        Command::Complexity { lattice, depth, scheme } => {
            let rows = complexity_table(&Lattice::from_spec(lattice)?, DepthSpec::parse(depth)?, &Scheme::parse(scheme)?)?;
            ctx.csv_header()?;
            write!(ctx.out, "{}", complexity_csv(&rows))?;
        }
        Command::Bench { what: Bench::Permute { rank, gamma, bench_threads, reps } } => {
            let rows = benchmark_permute(*rank, gamma, bench_threads, *reps, seed)?;
            ctx.csv_header()?;
            writeln!(ctx.out, "{}", BenchRow::CSV_HEADER)?;
            for r in rows {
                writeln!(ctx.out, "{}", r.csv())?;
            }
        }
    }
    Ok(())
}

fn analyze(ctx: &mut Ctx, what: &Analyze) -> Result<()> {
    let seed = ctx.cli.seed;
    match what {
        Analyze::Pt { source, plan, batches, n_c, bins } => {
            let c = load(source, seed)?;
            let plan = ctx.plan(plan, &c)?;
            let n_c = n_c.unwrap_or(1 << plan.batch.len());
            let mut src = EngineBatches::new(&c, &plan, zeros(c.n()), n_c, FidelitySpec::exact(), ctx.engine(), seed)?;
            let mut probs = Vec::with_capacity(batches * n_c);
            for _ in 0..*batches {
                probs.extend(src.next_batch()?.into_iter().map(|e| e.1));
            }
            let h = porter_thomas_check(&probs, 2f64.powi(c.n() as i32), *bins)?;
            ctx.csv_header()?;
            writeln!(ctx.out, "# count: {}", h.count)?;
            writeln!(ctx.out, "# ks: {}", h.ks)?;
            write!(ctx.out, "{}", h.to_csv())?;
        }
        Analyze::Pearson { source, plan, batches, n_c } => {
            let c = load(source, seed)?;
            let plan = ctx.plan(plan, &c)?;
            let opts = ctx.engine();
            let n_c = n_c.unwrap_or(1 << plan.batch.len());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let width = c.n() - plan.batch.len();
            let mut all = Vec::with_capacity(*batches);
            for _ in 0..*batches {
                let s_ab = random_bits(width, &mut rng);
                // A fixed batch seed keeps the same batch-region strings.
                all.push(amplitude_batch(&c, &zeros(c.n()), &s_ab, &plan.batch, n_c, &plan, &FidelitySpec::exact(), seed, &opts)?);
            }
            let report = pearson_from_batches(&all)?;
            ctx.csv_header()?;
            write!(ctx.out, "{}", report.to_csv())?;
        }
        Analyze::Xeb { source, samples } => {
            let c = load(source, seed)?;
            let text = std::fs::read_to_string(samples)?;
            let mut drawn = Vec::new();
            for line in text.lines() {
                let v: serde_json::Value = match serde_json::from_str(line) {
                    Ok(v) => v,
                    Err(e) => return usage(format!("bad sample line `{line}`: {e}")),
                };
                if let Some(s) = v.get("sample").and_then(|s| s.as_str()) {
                    let b = parse_bits(s)?;
                    if b.len() != c.n() {
                        return usage(format!("sample `{s}` has {} bits, circuit has {}", b.len(), c.n()));
                    }
                    drawn.push(b);
                }
            }
            if drawn.is_empty() {
                return usage("no samples in the file");
            }
            let dist = exact_distribution(&c, &zeros(c.n()))?;
            let probs: Vec<f64> = drawn.iter().map(|s| dist[to_index(s)]).collect();
            let report = json!({
                "config": ctx.config(),
                "samples": drawn.len(),
                "xeb_fidelity": xeb_fidelity(&drawn, &dist)?,
                "linear_xeb": linear_xeb(&probs, dist.len() as f64)?,
            });
            writeln!(ctx.out, "{report}")?;
        }
    }
    Ok(())
}
