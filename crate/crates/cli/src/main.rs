//! Command-line interface: every module of the toolkit behind one binary
//! with JSON input/output, deterministic seeds, and a demo suite that
//! reruns the headline experiments.
//!
//! Exit codes: 0 success, 2 domain/integrity errors, 3 precision or
//! convergence errors.

mod demo;
mod io;

use clap::{Parser, Subcommand};

use ultraflow::diffeo::{weighted_norm_a, Diffeo, DiffeoJson};
use ultraflow::error::Error;
use ultraflow::flows::{
    bch_discrepancy, exp_field, log_diffeo, monomial_flow, one_param_check, VectorField,
};
use ultraflow::mahler::{self, CtIndex, MahlerJson, MahlerSeries};
use ultraflow::padic::{PadicNumber, Val};
use ultraflow::profinite::{self, Closure, FiniteMap};
use ultraflow::reps;
use ultraflow::symplectic;

use io::{read_input, write_json};

#[derive(Parser)]
#[command(name = "ultraflow", version, about = "exact p-adic analysis toolkit")]
pub struct Cli {
    /// Prime base.
    #[arg(long, default_value_t = 3, global = true)]
    p: u64,
    /// Working precision (digits of p).
    #[arg(long, default_value_t = 12, global = true)]
    precision: u32,
    /// Degree bound for series and flows.
    #[arg(long, default_value_t = 32, global = true)]
    degree: usize,
    /// Grid level for norms and cached tables.
    #[arg(long, default_value_t = 3, global = true)]
    level: u32,
    /// Seed for every random draw (recorded in demo output).
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Emit compact JSON only (default already is JSON; kept for scripts).
    #[arg(long, global = true)]
    json: bool,
    /// Include per-coset certificates in representation outputs.
    #[arg(long, global = true)]
    certificate: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mahler-basis function space operations.
    Mahler {
        #[command(subcommand)]
        op: MahlerOp,
    },
    /// Near-identity group operations.
    Group {
        #[command(subcommand)]
        op: GroupOp,
    },
    /// Flows, logarithms, brackets.
    Flow {
        #[command(subcommand)]
        op: FlowOp,
    },
    /// Finite-quotient tower operations.
    Profinite {
        #[command(subcommand)]
        op: ProfiniteOp,
    },
    /// Symplectic / potential polynomial machinery.
    Symp {
        #[command(subcommand)]
        op: SympOp,
    },
    /// Finite character theory.
    Reps {
        #[command(subcommand)]
        op: RepsOp,
    },
    /// Reproduce the acceptance experiments.
    Demo {
        #[command(subcommand)]
        op: demo::DemoOp,
    },
}

#[derive(Subcommand)]
enum MahlerOp {
    /// Coefficients from a value table `{"values": ["0", "1", ...]}`.
    Extract { input: Option<String> },
    /// Evaluate `{"series": .., "x": "5"}`.
    Eval { input: Option<String> },
    /// Grid norm of a series; `--t` picks the smoothness order.
    Norm {
        input: Option<String>,
        #[arg(long, default_value_t = 0)]
        t: u32,
    },
    /// Analyticity verdict plus the two analytic norms when it holds.
    Analytic { input: Option<String> },
}

#[derive(Subcommand)]
enum GroupOp {
    /// `{"f": .., "g": ..}` -> the composition `f . g`.
    Compose { input: Option<String> },
    /// `{"f": ..}` -> the inverse.
    Invert { input: Option<String> },
    /// `{"f": .., "g": ..}` -> distance exponent at order `--t`.
    Dist {
        input: Option<String>,
        #[arg(long, default_value_t = 0)]
        t: u32,
    },
    /// Membership in the clopen ball W, plus the weighted norm report.
    CheckW {
        input: Option<String>,
        #[arg(long, default_value_t = 1)]
        t: u32,
    },
}

#[derive(Subcommand)]
enum FlowOp {
    /// Exponentiate `{"mono": ["0","9"], "q": "1"}`.
    Exp { input: Option<String> },
    /// Logarithm of a diffeo `{"f": ..}`; step log as NDJSON on stderr.
    Log { input: Option<String> },
    /// Closed-form monomial flow.
    Monomial {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        q: i64,
        #[arg(long, default_value_t = 16)]
        terms: u32,
    },
    /// Campbell-Hausdorff discrepancy `{"u": [..], "v": [..]}`.
    Bch {
        input: Option<String>,
        #[arg(long, default_value_t = 4)]
        order: u32,
    },
    /// One-parameter subgroup defect `{"mono": [..], "q1": .., "q2": ..}`.
    Check { input: Option<String> },
}

#[derive(Subcommand)]
enum ProfiniteOp {
    /// Truncate a diffeo `{"f": ..}` to the configured level.
    Truncate { input: Option<String> },
    /// Closure of generators `{"generators": [FiniteMap..]}`.
    Closure {
        input: Option<String>,
        #[arg(long, default_value_t = 20000)]
        cap: usize,
    },
    /// Tower-consistency report for a diffeo across cached levels.
    CheckTower { input: Option<String> },
}

#[derive(Subcommand)]
enum SympOp {
    /// Exterior derivative of a 1-form `{"form": [PolyN..]}`.
    #[command(name = "dA")]
    DA { input: Option<String> },
    /// Potential and symplectic invariance of `{"map": [..], "form": [..]}`.
    Check { input: Option<String> },
    /// Lie-derivative kernel dimension of `{"form": [..]}`.
    Kernel { input: Option<String> },
    /// Sp membership of `{"matrix": [[..]]}` against the standard form.
    Sp { input: Option<String> },
}

#[derive(Subcommand)]
enum RepsOp {
    /// Character table of `{"name": "s3"}` or `{"mul": [[..]]}`.
    Table { input: Option<String> },
    /// Regular-representation multiplicities.
    Regular { input: Option<String> },
    /// Induce `{"group": .., "subgroup": [..], "irrep": 0}`.
    Induce { input: Option<String> },
    /// Mackey restriction check `{"group", "k", "n", "irrep"}`.
    Mackey { input: Option<String> },
    /// Internal tensor product check.
    Tensor { input: Option<String> },
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn parse_padic(p: u64, prec: u32, s: &str) -> Result<PadicNumber, Error> {
    let k: i128 = s
        .parse()
        .map_err(|_| Error::Domain(format!("expected a decimal integer, got {s:?}")))?;
    Ok(PadicNumber::from_i128(p, k, prec))
}

fn mono_from_strings(p: u64, prec: u32, v: &[String]) -> Result<Vec<PadicNumber>, Error> {
    v.iter().map(|s| parse_padic(p, prec, s)).collect()
}

fn check_prime(p: u64) -> Result<(), Error> {
    if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p.is_multiple_of(d)) {
        return Err(Error::Domain(format!("{p} is not a prime")));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    check_prime(cli.p)?;
    if cli.precision < 8 || cli.precision > ultraflow::padic::max_precision(cli.p) {
        return Err(Error::Domain(format!(
            "precision {} outside 8..={}",
            cli.precision,
            ultraflow::padic::max_precision(cli.p)
        )));
    }
    if cli.level < 1 || cli.level > 5 {
        return Err(Error::Domain(format!("level {} outside 1..=5", cli.level)));
    }
    let (p, prec, level) = (cli.p, cli.precision, cli.level);
    match &cli.command {
        Command::Mahler { op } => match op {
            MahlerOp::Extract { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    values: Vec<String>,
                    degree: Option<usize>,
                    /// Tail bound exponent; absent means the table is an
                    /// exact polynomial of the given degree.
                    #[serde(default)]
                    tail_val: Option<i64>,
                }
                let inp: In = read_input(input.as_deref())?;
                let degree = inp.degree.unwrap_or(inp.values.len().saturating_sub(1));
                let values = mono_from_strings(p, prec, &inp.values)?;
                let tail = inp.tail_val.map(Val::Finite).unwrap_or(Val::Infinite);
                let s = mahler::mahler_coeffs_from_values(p, prec, &values, degree, tail)?;
                write_json(&MahlerJson::from(&s))
            }
            MahlerOp::Eval { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    series: MahlerJson,
                    x: String,
                }
                let inp: In = read_input(input.as_deref())?;
                let s = MahlerSeries::try_from(&inp.series)?;
                let x = parse_padic(p, prec, &inp.x)?;
                let y = s.evaluate(&x)?;
                write_json(&ultraflow::padic::PadicJson::from(&y))
            }
            MahlerOp::Norm { input, t } => {
                #[derive(serde::Deserialize)]
                struct In {
                    series: MahlerJson,
                }
                let inp: In = read_input(input.as_deref())?;
                let s = MahlerSeries::try_from(&inp.series)?;
                let r = mahler::norm_ct(&s, CtIndex(*t), level)?;
                #[derive(serde::Serialize)]
                struct Out {
                    exponent: Option<i64>,
                    stabilized: bool,
                }
                write_json(&Out { exponent: r.value.exponent(), stabilized: r.stabilized })
            }
            MahlerOp::Analytic { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    series: MahlerJson,
                }
                let inp: In = read_input(input.as_deref())?;
                let s = MahlerSeries::try_from(&inp.series)?;
                let (ok, margin) = mahler::is_analytic(&s);
                #[derive(serde::Serialize)]
                struct Out {
                    analytic: bool,
                    margin: Option<i64>,
                    #[serde(skip_serializing_if = "Option::is_none")]
                    norm_mahler: Option<Option<i64>>,
                    #[serde(skip_serializing_if = "Option::is_none")]
                    norm_monomial: Option<Option<i64>>,
                }
                let (nm, nb) = if ok {
                    let (a, b) = mahler::analytic_norm_pair(&s)?;
                    (Some(a.exponent()), Some(b.exponent()))
                } else {
                    (None, None)
                };
                write_json(&Out {
                    analytic: ok,
                    margin: margin.exponent(),
                    norm_mahler: nm,
                    norm_monomial: nb,
                })
            }
        },
        Command::Group { op } => match op {
            GroupOp::Compose { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    f: DiffeoJson,
                    g: DiffeoJson,
                }
                let inp: In = read_input(input.as_deref())?;
                let f = Diffeo::try_from(&inp.f)?;
                let g = Diffeo::try_from(&inp.g)?;
                write_json(&DiffeoJson::from(&f.compose(&g)?))
            }
            GroupOp::Invert { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    f: DiffeoJson,
                }
                let inp: In = read_input(input.as_deref())?;
                let f = Diffeo::try_from(&inp.f)?;
                write_json(&DiffeoJson::from(&f.invert()?))
            }
            GroupOp::Dist { input, t } => {
                #[derive(serde::Deserialize)]
                struct In {
                    f: DiffeoJson,
                    g: DiffeoJson,
                }
                let inp: In = read_input(input.as_deref())?;
                let f = Diffeo::try_from(&inp.f)?;
                let g = Diffeo::try_from(&inp.g)?;
                let d = f.distance(&g, CtIndex(*t), level)?;
                #[derive(serde::Serialize)]
                struct Out {
                    exponent: Option<i64>,
                }
                write_json(&Out { exponent: d.exponent() })
            }
            GroupOp::CheckW { input, t } => {
                #[derive(serde::Deserialize)]
                struct In {
                    f: DiffeoJson,
                }
                let inp: In = read_input(input.as_deref())?;
                let f = Diffeo::try_from(&inp.f)?;
                let in_w = f.in_w(CtIndex(*t), level)?;
                let wn = weighted_norm_a(&f, CtIndex(0), level)?;
                #[derive(serde::Serialize)]
                struct Out {
                    in_w: bool,
                    isometry: bool,
                    weighted_norm_exponent: Option<i64>,
                    weighted_witnesses: usize,
                }
                write_json(&Out {
                    in_w,
                    isometry: f.is_isometry(f.levels())?,
                    weighted_norm_exponent: wn.value.exponent(),
                    weighted_witnesses: wn.witness_count,
                })
            }
        },
        Command::Flow { op } => match op {
            FlowOp::Exp { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    mono: Vec<String>,
                    q: String,
                }
                let inp: In = read_input(input.as_deref())?;
                let mono = mono_from_strings(p, prec, &inp.mono)?;
                let field = VectorField::from_monomial(p, prec, mono)?;
                let q = parse_padic(p, prec, &inp.q)?;
                let r = exp_field(&field, &q, cli.degree, prec as i64, level)?;
                #[derive(serde::Serialize)]
                struct Out {
                    g: DiffeoJson,
                    terms_used: usize,
                    precision: i64,
                }
                write_json(&Out {
                    g: DiffeoJson::from(&r.g),
                    terms_used: r.terms_used,
                    precision: r.precision,
                })
            }
            FlowOp::Log { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    f: DiffeoJson,
                }
                let inp: In = read_input(input.as_deref())?;
                let f = Diffeo::try_from(&inp.f)?;
                let r = log_diffeo(&f, prec, cli.degree, prec as i64)?;
                for s in &r.steps {
                    // line-delimited step records
                    println!(
                        "{{\"j\":{},\"norm_change_exponent\":{}}}",
                        s.j,
                        s.change
                            .exponent()
                            .map(|e| e.to_string())
                            .unwrap_or_else(|| "null".into())
                    );
                }
                write_json(&MahlerJson::from(r.field.coeff()))
            }
            FlowOp::Monomial { m, q, terms } => {
                let qv = PadicNumber::from_integer(p, *q, prec);
                let s = monomial_flow(p, prec, *m, &qv, *terms)?;
                write_json(&MahlerJson::from(&s))
            }
            FlowOp::Bch { input, order } => {
                #[derive(serde::Deserialize)]
                struct In {
                    u: Vec<String>,
                    v: Vec<String>,
                }
                let inp: In = read_input(input.as_deref())?;
                let u = VectorField::from_monomial(p, prec, mono_from_strings(p, prec, &inp.u)?)?;
                let v = VectorField::from_monomial(p, prec, mono_from_strings(p, prec, &inp.v)?)?;
                let d = bch_discrepancy(&u, &v, *order, cli.degree, prec as i64, level)?;
                #[derive(serde::Serialize)]
                struct Out {
                    exponent: Option<i64>,
                }
                write_json(&Out { exponent: d.exponent() })
            }
            FlowOp::Check { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    mono: Vec<String>,
                    q1: String,
                    q2: String,
                }
                let inp: In = read_input(input.as_deref())?;
                let field =
                    VectorField::from_monomial(p, prec, mono_from_strings(p, prec, &inp.mono)?)?;
                let q1 = parse_padic(p, prec, &inp.q1)?;
                let q2 = parse_padic(p, prec, &inp.q2)?;
                let d = one_param_check(&field, &q1, &q2, cli.degree, prec as i64, level)?;
                #[derive(serde::Serialize)]
                struct Out {
                    exponent: Option<i64>,
                }
                write_json(&Out { exponent: d.exponent() })
            }
        },
        Command::Profinite { op } => match op {
            ProfiniteOp::Truncate { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    f: DiffeoJson,
                }
                let inp: In = read_input(input.as_deref())?;
                let f = Diffeo::try_from(&inp.f)?;
                write_json(&profinite::truncate(&f, level)?)
            }
            ProfiniteOp::Closure { input, cap } => {
                #[derive(serde::Deserialize)]
                struct In {
                    generators: Vec<FiniteMap>,
                }
                let inp: In = read_input(input.as_deref())?;
                match profinite::group_closure(&inp.generators, *cap)? {
                    Closure::Complete(g) => {
                        #[derive(serde::Serialize)]
                        struct Out {
                            complete: bool,
                            order: usize,
                        }
                        write_json(&Out { complete: true, order: g.order() })
                    }
                    Closure::CapExceeded { partial_size, cap } => {
                        #[derive(serde::Serialize)]
                        struct Out {
                            complete: bool,
                            partial_size: usize,
                            cap: usize,
                        }
                        write_json(&Out { complete: false, partial_size, cap })
                    }
                }
            }
            ProfiniteOp::CheckTower { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    f: DiffeoJson,
                }
                let inp: In = read_input(input.as_deref())?;
                let f = Diffeo::try_from(&inp.f)?;
                let mut per_level = Vec::new();
                for l in 2..=f.levels() {
                    per_level.push(profinite::reduction_consistency(&f, l)?);
                }
                #[derive(serde::Serialize)]
                struct Out {
                    consistent: bool,
                    per_level: Vec<bool>,
                }
                write_json(&Out { consistent: per_level.iter().all(|&b| b), per_level })
            }
        },
        Command::Symp { op } => match op {
            SympOp::DA { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    form: Vec<symplectic::PolyNJson>,
                }
                let inp: In = read_input(input.as_deref())?;
                let comps = inp
                    .form
                    .iter()
                    .map(symplectic::PolyN::try_from)
                    .collect::<Result<Vec<_>, _>>()?;
                let n = comps.len();
                let a = symplectic::OneForm { n, components: comps };
                let f = symplectic::exterior_derivative(&a)?;
                let out: Vec<Vec<symplectic::PolyNJson>> = f
                    .components
                    .iter()
                    .map(|row| row.iter().map(symplectic::PolyNJson::from).collect())
                    .collect();
                write_json(&out)
            }
            SympOp::Check { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    map: Vec<symplectic::PolyNJson>,
                    form: Vec<symplectic::PolyNJson>,
                }
                let inp: In = read_input(input.as_deref())?;
                let comps = inp
                    .map
                    .iter()
                    .map(symplectic::PolyN::try_from)
                    .collect::<Result<Vec<_>, _>>()?;
                let n = comps.len();
                let g = symplectic::PolyMap { n, components: comps };
                let fcomps = inp
                    .form
                    .iter()
                    .map(symplectic::PolyN::try_from)
                    .collect::<Result<Vec<_>, _>>()?;
                let a = symplectic::OneForm { n, components: fcomps };
                let da = symplectic::exterior_derivative(&a)?;
                #[derive(serde::Serialize)]
                struct Out {
                    potential: bool,
                    symplectic: bool,
                }
                write_json(&Out {
                    potential: symplectic::check_potential(&g, &a, symplectic::DEGREE_CAP)?,
                    symplectic: symplectic::check_symplectic(&g, &da, symplectic::DEGREE_CAP)?,
                })
            }
            SympOp::Kernel { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    form: Vec<symplectic::PolyNJson>,
                    degree: Option<usize>,
                }
                let inp: In = read_input(input.as_deref())?;
                let comps = inp
                    .form
                    .iter()
                    .map(symplectic::PolyN::try_from)
                    .collect::<Result<Vec<_>, _>>()?;
                let n = comps.len();
                let a = symplectic::OneForm { n, components: comps };
                let d = inp.degree.unwrap_or(2);
                let (dim, _) =
                    symplectic::lie_derivative_kernel(&a, d, symplectic::DEGREE_CAP, 6000)?;
                #[derive(serde::Serialize)]
                struct Out {
                    dimension: usize,
                }
                write_json(&Out { dimension: dim })
            }
            SympOp::Sp { input } => {
                #[derive(serde::Deserialize)]
                struct In {
                    matrix: Vec<Vec<i64>>,
                }
                let inp: In = read_input(input.as_deref())?;
                let n = inp.matrix.len();
                let g = symplectic::PolyMap::linear(p, prec, &inp.matrix)?;
                let eps = symplectic::standard_epsilon(n);
                #[derive(serde::Serialize)]
                struct Out {
                    member: bool,
                }
                write_json(&Out { member: symplectic::sp_membership(&g, &eps)? })
            }
        },
        Command::Reps { op } => {
            match op {
                RepsOp::Table { input } => {
                    let spec: io::GroupSpec = read_input(input.as_deref())?;
                    let g = spec.build()?;
                    let t = reps::character_table(&g, reps::TABLE_CAP)?;
                    write_json(&io::table_json(&g, &t)?)
                }
                RepsOp::Regular { input } => {
                    let spec: io::GroupSpec = read_input(input.as_deref())?;
                    let g = spec.build()?;
                    let t = reps::character_table(&g, reps::TABLE_CAP)?;
                    let mults = reps::decompose_regular(&g, &t)?;
                    #[derive(serde::Serialize)]
                    struct Out {
                        degrees: Vec<u64>,
                        multiplicities: Vec<u64>,
                        matches: bool,
                    }
                    let matches = mults == t.degrees;
                    write_json(&Out {
                        degrees: t.degrees.clone(),
                        multiplicities: mults,
                        matches,
                    })
                }
                RepsOp::Induce { input } => {
                    #[derive(serde::Deserialize)]
                    struct In {
                        group: io::GroupSpec,
                        subgroup: Vec<usize>,
                        irrep: usize,
                    }
                    let inp: In = read_input(input.as_deref())?;
                    let g = inp.group.build()?;
                    let h = reps::Subgroup::new(&g, &inp.subgroup)?;
                    let e = g.exponent() as u32;
                    let chi = io::subgroup_character(&h, inp.irrep, e)?;
                    let classes = g.conjugacy_classes();
                    let ind = reps::induce(&g, &classes, &h, &chi, e)?;
                    write_json(&io::character_values_json(&ind))
                }
                RepsOp::Mackey { input } => {
                    #[derive(serde::Deserialize)]
                    struct In {
                        group: io::GroupSpec,
                        k: Vec<usize>,
                        n: Vec<usize>,
                        irrep: usize,
                    }
                    let inp: In = read_input(input.as_deref())?;
                    let g = inp.group.build()?;
                    let k = reps::Subgroup::new(&g, &inp.k)?;
                    let n = reps::Subgroup::new(&g, &inp.n)?;
                    let e = g.exponent() as u32;
                    let chi = io::subgroup_character(&k, inp.irrep, e)?;
                    let cert = reps::mackey_restriction_check(&g, &k, &n, &chi, e)?;
                    write_json(&io::mackey_json(&cert, cli.certificate))
                }
                RepsOp::Tensor { input } => {
                    #[derive(serde::Deserialize)]
                    struct In {
                        group: io::GroupSpec,
                        k: Vec<usize>,
                        n: Vec<usize>,
                        irrep_k: usize,
                        irrep_n: usize,
                    }
                    let inp: In = read_input(input.as_deref())?;
                    let g = inp.group.build()?;
                    let k = reps::Subgroup::new(&g, &inp.k)?;
                    let n = reps::Subgroup::new(&g, &inp.n)?;
                    let e = g.exponent() as u32;
                    let chi = io::subgroup_character(&k, inp.irrep_k, e)?;
                    let psi = io::subgroup_character(&n, inp.irrep_n, e)?;
                    let cert = reps::tensor_product_check(&g, &k, &n, &chi, &psi, e)?;
                    write_json(&io::tensor_json(&cert, cli.certificate))
                }
            }
        }
        Command::Demo { op } => demo::run(cli, op),
    }
}
