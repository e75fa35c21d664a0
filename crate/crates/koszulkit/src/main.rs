//! Command-line front end: poset ingestion, Koszulity analysis, builders
//! and export formats.

use std::error::Error;
use std::fs;
use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use koszulkit::bar;
use koszulkit::builder::{self, GeneratorSpec};
use koszulkit::linalg::FieldSpec;
use koszulkit::poset::{poset_from_json, poset_to_json, Poset};
use koszulkit::shriek;

#[derive(Parser)]
#[command(
    name = "koszulkit",
    version,
    about = "Exact Koszulity analysis for incidence rings of finite graded posets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check well-formedness and gradedness of a poset
    Validate {
        /// Poset JSON file, or "-" for standard input
        poset: String,
    },
    /// Print the bigraded Tor table as TSV
    Tor {
        poset: String,
        /// Coefficient field: "q" or "fp:<prime>"
        #[arg(long, default_value = "q")]
        field: String,
        /// Also emit zero cells
        #[arg(long)]
        full: bool,
        /// Aligned human-readable table instead of TSV
        #[arg(long)]
        pretty: bool,
        /// Dump differential matrices in triplet form to stderr
        #[arg(long)]
        debug_matrices: bool,
    },
    /// Decide Koszulity; exits 1 when the verdict is negative
    Koszul {
        poset: String,
        #[arg(long, default_value = "q")]
        field: String,
        /// Print an explicit non-bounding cycle for each off-diagonal witness
        #[arg(long)]
        witness: bool,
        #[arg(long)]
        debug_matrices: bool,
    },
    /// Compare quadratic-dual dimensions against the Tor diagonal
    Shriek {
        poset: String,
        #[arg(long, default_value = "q")]
        field: String,
        /// Also check exactness of the Koszul complex
        #[arg(long)]
        koszul_complex: bool,
    },
    /// Tor of a frontier module on a chosen maximal element
    ModuleTor {
        poset: String,
        /// The maximal element t
        #[arg(long)]
        target: String,
        /// Comma-separated generators u with u < t
        #[arg(long, value_delimiter = ',')]
        gens: Vec<String>,
        /// Homological degree
        #[arg(long)]
        n: usize,
        /// Internal degree
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "q")]
        field: String,
    },
    /// Run a build script; log to stderr, resulting poset JSON to stdout
    Build {
        /// Script JSON file, or "-" for standard input
        script: String,
    },
    /// Emit a built-in poset family as JSON
    Gen {
        /// Family spec, e.g. tile, hexagon, chain:4, vdiamond:3,
        /// hdiamond:2,2, antichain:3, tiling:0,0;2,0, random:7,10,0.35
        spec: String,
    },
    /// Emit the Hasse diagram in DOT format
    Dot { poset: String },
}

fn main() -> ExitCode {
    configure_threads();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() {
    if let Ok(v) = std::env::var("KOSZULKIT_THREADS") {
        if let Ok(k) = v.trim().parse::<usize>() {
            if k > 0 {
                // 0 means auto; a failure only means the pool already exists
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

fn read_input(path: &str) -> Result<String, Box<dyn Error>> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

fn load_poset(path: &str) -> Result<Poset, Box<dyn Error>> {
    Ok(poset_from_json(&read_input(path)?)?)
}

fn dump_differentials(p: &Poset) -> Result<(), Box<dyn Error>> {
    let l = p.max_interval_length();
    for m in 0..=l {
        for n in 1..=m {
            let d = bar::build_differential(p, n, m)?;
            eprintln!("# d n={n} m={m}");
            eprint!("{}", d.triplet_dump());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Box<dyn Error>> {
    match cli.command {
        Command::Validate { poset } => {
            let p = load_poset(&poset)?;
            let report = p.validate_graded();
            println!("elements: {}", p.len());
            println!("covers: {}", p.covers().len());
            println!("graded: {}", report.graded);
            match report.witness {
                None => Ok(0),
                Some((x, y, short, long)) => {
                    println!("witness: [{x}, {y}] lengths {short} and {long}");
                    Ok(1)
                }
            }
        }
        Command::Tor {
            poset,
            field,
            full,
            pretty,
            debug_matrices,
        } => {
            let p = load_poset(&poset)?;
            let f = FieldSpec::parse(&field)?;
            if debug_matrices {
                dump_differentials(&p)?;
            }
            let table = bar::tor_table(&p, f)?;
            if pretty {
                print!("{}", table.to_pretty());
            } else {
                print!("{}", table.to_tsv(full));
            }
            Ok(0)
        }
        Command::Koszul {
            poset,
            field,
            witness,
            debug_matrices,
        } => {
            let p = load_poset(&poset)?;
            let f = FieldSpec::parse(&field)?;
            if debug_matrices {
                dump_differentials(&p)?;
            }
            let table = bar::tor_table(&p, f)?;
            println!("koszul: {} (field {})", table.koszul, f);
            for &(n, m, dim) in &table.witnesses {
                println!("witness: n={n} m={m} dim={dim}");
            }
            if witness {
                for &(n, m, _) in &table.witnesses {
                    if let Some(cycle) = bar::witness_cycle(&p, n, m, f)? {
                        println!("witness cycle (n={n}, m={m}): {cycle}");
                    }
                }
            }
            Ok(if table.koszul { 0 } else { 1 })
        }
        Command::Shriek {
            poset,
            field,
            koszul_complex,
        } => {
            let p = load_poset(&poset)?;
            let f = FieldSpec::parse(&field)?;
            let report = shriek::phi_dimension_check(&p, f)?;
            print!("{}", report.to_tsv());
            if koszul_complex {
                let exactness = shriek::koszul_complex_exact(&p, f)?;
                print!("{}", exactness.to_tsv());
            }
            Ok(0)
        }
        Command::ModuleTor {
            poset,
            target,
            gens,
            n,
            m,
            field,
        } => {
            let p = load_poset(&poset)?;
            let f = FieldSpec::parse(&field)?;
            let dim = bar::module_tor(&p, &target, &gens, n, m, f)?;
            println!("{dim}");
            Ok(0)
        }
        Command::Build { script } => {
            let text = read_input(&script)?;
            let parsed = builder::parse_script(&text)?;
            match builder::run_script(&parsed) {
                Ok(outcome) => {
                    for line in &outcome.log {
                        eprintln!("{line}");
                    }
                    print!("{}", poset_to_json(&outcome.poset));
                    Ok(0)
                }
                Err(failure) => {
                    for line in &failure.log {
                        eprintln!("{line}");
                    }
                    Err(Box::new(failure.error))
                }
            }
        }
        Command::Gen { spec } => {
            let g = GeneratorSpec::parse(&spec)?;
            let p = builder::generate(&g)?;
            print!("{}", poset_to_json(&p));
            Ok(0)
        }
        Command::Dot { poset } => {
            let p = load_poset(&poset)?;
            print!("{}", p.to_dot());
            Ok(0)
        }
    }
}
