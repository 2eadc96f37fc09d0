//! Command-line front end: `verify`, `converge`, `mesh` and `solve`
//! subcommands over the library. Exit codes: 0 success, 1 verification
//! failure, 2 solver failure, 3 usage error.

use crate::builtin::load_builtin;
use crate::grid::{self, StageGrid};
use crate::kkt::{newton_solve, NewtonConfig};
use crate::study::{format_float, run_convergence_study, GridFamily, ProblemSpec, StudySpec};
use crate::verify::verify_triplet;
use std::fs;

const USAGE: &str = "\
peer-triplets: variable-stepsize implicit Peer triplets for optimal control

USAGE:
    peer-triplets verify <triplet> [--coefficients <file>] [--format table|structured]
    peer-triplets converge --triplet <name> --problem <id> --grid <family> [options]
    peer-triplets mesh --problem <id> --grid <family> --N <steps> [options]
    peer-triplets solve --triplet <name> --problem <id> --grid <family> --N <steps> [options]

TRIPLETS:
    AP4o33vg | AP4o33vs | AP4o43vs | AP4o33va

OPTIONS:
    --triplet <name>      triplet name (or coefficient file via --coefficients)
    --problem <id>        tracking | catenary
    --lambda <v>          tracking stiffness parameter      [default -50]
    --alpha <v>           tracking control weight           [default 1]
    --a1 <v> --a2 <v>     catenary parameters               [default 10, -10]
    --grid <family>       uniform | alternating | smooth | equi
    --sigma <v>           alternating stepsize ratio        [default 1.3]
    --eta <v>             smooth-grid growth parameter      [default 0.3]
    --h0 <v>              smooth-grid first stepsize        [default 0.004]
    --r <3|4>             density order for equi grids      [default: triplet's r1]
    --N <list>            comma-separated step counts; N counts integration
                          steps, so the benchmark meshes labelled 'N+1 = 40'
                          are --N 40 (equi uses N-1 inner nodes, uniform N
                          steps of T/N)
    --component <k>       1-based error component           [default 1]
    --tol <v>             Newton residual tolerance         [default 1e-12]
    --out <path>          write CSV/mesh output to a file instead of stdout
    --dump <path>         solve: write all stage values as CSV

All floating-point output carries 17 significant digits.
";

/// Entry point of the thin binary.
pub fn run_cli(args: Vec<String>) -> i32 {
    match dispatch(&args) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {}", msg);
            eprintln!("{}", USAGE);
            3
        }
        Err(CliError::Verification(msg)) => {
            eprintln!("verification failure: {}", msg);
            1
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("solver failure: {}", msg);
            2
        }
    }
}

enum CliError {
    Usage(String),
    Verification(String),
    Solver(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

struct Flags {
    positional: Vec<String>,
    pairs: Vec<(String, String)>,
}

impl Flags {
    fn parse(args: &[String]) -> Result<Flags, CliError> {
        let mut positional = Vec::new();
        let mut pairs = Vec::new();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            if let Some(name) = arg.strip_prefix("--") {
                let value = it
                    .next()
                    .ok_or_else(|| usage(format!("flag --{} needs a value", name)))?;
                pairs.push((name.to_string(), value.clone()));
            } else {
                positional.push(arg.clone());
            }
        }
        Ok(Flags { positional, pairs })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.pairs
            .iter()
            .rev()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    fn get_f64(&self, name: &str, default: f64) -> Result<f64, CliError> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| usage(format!("--{} expects a number, got '{}'", name, v))),
        }
    }

    fn get_usize(&self, name: &str, default: usize) -> Result<usize, CliError> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| usage(format!("--{} expects an integer, got '{}'", name, v))),
        }
    }
}

fn dispatch(args: &[String]) -> Result<i32, CliError> {
    let Some(cmd) = args.first() else {
        return Err(usage("missing subcommand"));
    };
    let rest = Flags::parse(&args[1..])?;
    match cmd.as_str() {
        "verify" => cmd_verify(&rest),
        "converge" => cmd_converge(&rest),
        "mesh" => cmd_mesh(&rest),
        "solve" => cmd_solve(&rest),
        "help" | "--help" | "-h" => {
            println!("{}", USAGE);
            Ok(0)
        }
        other => Err(usage(format!("unknown subcommand '{}'", other))),
    }
}

fn load_triplet(
    flags: &Flags,
    positional_name: Option<&str>,
) -> Result<crate::PeerTriplet, CliError> {
    if let Some(path) = flags.get("coefficients") {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read coefficient file '{}': {}", path, e)))?;
        return crate::coeff_file::import_coefficients(&text)
            .map_err(|e| usage(format!("coefficient file '{}': {}", path, e)));
    }
    let name = flags
        .get("triplet")
        .or(positional_name)
        .ok_or_else(|| usage("missing triplet name"))?;
    load_builtin(name).map_err(|e| usage(format!("{}", e)))
}

fn cmd_verify(flags: &Flags) -> Result<i32, CliError> {
    let t = load_triplet(flags, flags.positional.first().map(|s| s.as_str()))?;
    let report = verify_triplet(&t).map_err(|e| CliError::Verification(format!("{}", e)))?;
    let rendered = match flags.get("format").unwrap_or("table") {
        "table" => report.render_table(),
        "structured" => report.render_structured(),
        other => return Err(usage(format!("unknown format '{}'", other))),
    };
    match flags.get("out") {
        Some(path) => fs::write(path, &rendered)
            .map_err(|e| CliError::Verification(format!("cannot write '{}': {}", path, e)))?,
        None => print!("{}", rendered),
    }
    Ok(if report.all_pass() { 0 } else { 1 })
}

fn parse_problem(flags: &Flags) -> Result<ProblemSpec, CliError> {
    match flags.get("problem").unwrap_or("tracking") {
        "tracking" => Ok(ProblemSpec::Tracking {
            lambda: flags.get_f64("lambda", -50.0)?,
            alpha: flags.get_f64("alpha", 1.0)?,
        }),
        "catenary" => Ok(ProblemSpec::Catenary {
            a1: flags.get_f64("a1", 10.0)?,
            a2: flags.get_f64("a2", -10.0)?,
        }),
        other => Err(usage(format!("unknown problem '{}'", other))),
    }
}

fn parse_grid(flags: &Flags) -> Result<GridFamily, CliError> {
    match flags.get("grid").unwrap_or("uniform") {
        "uniform" => Ok(GridFamily::Uniform),
        "alternating" => Ok(GridFamily::Alternating {
            sigma: flags.get_f64("sigma", 1.3)?,
        }),
        "smooth" => Ok(GridFamily::Smooth {
            h0: flags.get_f64("h0", 0.004)?,
            eta: flags.get_f64("eta", 0.3)?,
        }),
        "equi" => {
            let r = match flags.get("r") {
                None => None,
                Some(v) => {
                    let r: usize = v.parse().map_err(|_| usage("--r expects 3 or 4"))?;
                    if r != 3 && r != 4 {
                        return Err(usage("--r expects 3 or 4"));
                    }
                    Some(r)
                }
            };
            Ok(GridFamily::Equidistributed { r })
        }
        other => Err(usage(format!("unknown grid family '{}'", other))),
    }
}

fn parse_n_list(flags: &Flags) -> Result<Vec<usize>, CliError> {
    let text = flags.get("N").ok_or_else(|| usage("missing --N"))?;
    let mut out = Vec::new();
    for tok in text.split(',') {
        out.push(
            tok.trim()
                .parse()
                .map_err(|_| usage(format!("bad step count '{}' in --N", tok)))?,
        );
    }
    if out.is_empty() {
        return Err(usage("--N list is empty"));
    }
    Ok(out)
}

fn cmd_converge(flags: &Flags) -> Result<i32, CliError> {
    let component = flags.get_usize("component", 1)?;
    if component == 0 || component > 3 {
        return Err(usage(
            "--component is 1-based and at most the state dimension 3",
        ));
    }
    let spec = StudySpec {
        triplet: flags
            .get("triplet")
            .ok_or_else(|| usage("missing --triplet"))?
            .to_string(),
        problem: parse_problem(flags)?,
        grid: parse_grid(flags)?,
        component: component - 1,
        n_list: parse_n_list(flags)?,
        tolerance: flags.get_f64("tol", 1e-12)?,
    };
    let record = run_convergence_study(&spec).map_err(|e| CliError::Solver(format!("{}", e)))?;
    let csv = record.to_csv();
    match flags.get("out") {
        Some(path) => fs::write(path, &csv)
            .map_err(|e| CliError::Solver(format!("cannot write '{}': {}", path, e)))?,
        None => print!("{}", csv),
    }
    Ok(0)
}

fn build_single_grid(
    flags: &Flags,
    problem: &ProblemSpec,
    n: usize,
) -> Result<StageGrid, CliError> {
    let grid_family = parse_grid(flags)?;
    let t_end = match problem {
        ProblemSpec::Tracking { .. } => 0.5,
        ProblemSpec::Catenary { .. } => 2.0,
    };
    let density_order = match grid_family {
        GridFamily::Equidistributed { r } => r.unwrap_or(3),
        _ => 3,
    };
    match grid_family {
        GridFamily::Uniform => grid::uniform(n - 1, t_end),
        GridFamily::Alternating { sigma } => grid::alternating(n, sigma, t_end),
        GridFamily::Smooth { h0, eta } => grid::smooth(h0, eta, n),
        GridFamily::Equidistributed { .. } => {
            let psi = problem.density(density_order);
            grid::equidistribute(&psi, n - 1, t_end)
        }
    }
    .map_err(|e| CliError::Solver(format!("{}", e)))
}

fn cmd_mesh(flags: &Flags) -> Result<i32, CliError> {
    let problem = parse_problem(flags)?;
    let n_list = parse_n_list(flags)?;
    if n_list.len() != 1 {
        return Err(usage("mesh expects a single --N value"));
    }
    let g = build_single_grid(flags, &problem, n_list[0])?;
    let mut csv = String::from("n,t_n,h_n,sigma_n\n");
    for n in 0..g.num_steps() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            n,
            format_float(g.t[n]),
            format_float(g.h[n]),
            format_float(g.sigma[n]),
        ));
    }
    match flags.get("out") {
        Some(path) => fs::write(path, &csv)
            .map_err(|e| CliError::Solver(format!("cannot write '{}': {}", path, e)))?,
        None => print!("{}", csv),
    }
    // Ratio statistics summary: min/max sigma over n >= 1 and max |eta_n|
    // with eta_n = (sigma_n - 1)/h_n.
    eprintln!(
        "mesh: {} steps, T = {}, sigma in [{}, {}], max |eta| = {}",
        g.num_steps(),
        format_float(g.final_time()),
        format_float(g.sigma_min()),
        format_float(g.sigma_max()),
        format_float(g.eta_max()),
    );
    Ok(0)
}

fn cmd_solve(flags: &Flags) -> Result<i32, CliError> {
    let t = load_triplet(flags, None)?;
    let problem = parse_problem(flags)?;
    let n_list = parse_n_list(flags)?;
    if n_list.len() != 1 {
        return Err(usage("solve expects a single --N value"));
    }
    let g = build_single_grid(flags, &problem, n_list[0])?;
    let prob = problem.build().map_err(|e| usage(format!("{}", e)))?;
    let cfg = NewtonConfig {
        tolerance: flags.get_f64("tol", 1e-12)?,
        ..NewtonConfig::default()
    };
    let sol = newton_solve(&t, &g, prob.as_ref(), &cfg)
        .map_err(|e| CliError::Solver(format!("{}", e)))?;

    println!(
        "terminal state y_h(T)  = [{}]",
        sol.y_terminal
            .iter()
            .map(|v| format_float(*v))
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!(
        "terminal adjoint p_h(T) = [{}]",
        sol.p_terminal
            .iter()
            .map(|v| format_float(*v))
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!("residual  = {}", format_float(sol.residual_norm));
    println!("iterations = {}", sol.iterations);

    if let Some(path) = flags.get("dump") {
        let m = sol.m;
        let mut csv = String::from("n,i,t_ni");
        for c in 0..m {
            csv.push_str(&format!(",Y{}", c + 1));
        }
        for c in 0..m {
            csv.push_str(&format!(",P{}", c + 1));
        }
        csv.push('\n');
        for n in 0..g.num_steps() {
            for i in 0..t.s {
                csv.push_str(&format!(
                    "{},{},{}",
                    n,
                    i + 1,
                    format_float(g.stage_time(n, t.c[i]))
                ));
                for c in 0..m {
                    csv.push_str(&format!(",{}", format_float(sol.state_stage(n, i)[c])));
                }
                for c in 0..m {
                    csv.push_str(&format!(",{}", format_float(sol.adjoint_stage(n, i)[c])));
                }
                csv.push('\n');
            }
        }
        fs::write(path, &csv)
            .map_err(|e| CliError::Solver(format!("cannot write '{}': {}", path, e)))?;
    }
    Ok(0)
}
