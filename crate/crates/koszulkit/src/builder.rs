//! Constructions of Koszul posets: adjoining a fresh element above or
//! below a frontier, scripted sequences of such steps, and the built-in
//! generator families used throughout the tests.
//!
//! Adjoining above requires condition (†) on the frontier: a singleton,
//! or a common cover-predecessor that is the meet of every pair. Under
//! that condition the extension preserves Koszulity in both directions,
//! so a script starting from a verified Koszul poset certifies its output.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bar;
use crate::linalg::FieldSpec;
use crate::poset::{Poset, PosetError};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("element {0:?} is already present")]
    NameCollision(String),
    #[error("condition (†) fails for the frontier ({reason}{})",
            offending_pair_suffix(.pair))]
    DaggerViolation {
        reason: String,
        pair: Option<(String, String)>,
    },
    #[error("condition (‡) fails for the frontier ({reason}{})",
            offending_pair_suffix(.pair))]
    DdaggerViolation {
        reason: String,
        pair: Option<(String, String)>,
    },
    #[error("adjoining {new_element:?} breaks gradedness: interval [{x}, {y}] has maximal chains of lengths {short} and {long}")]
    GradednessViolation {
        new_element: String,
        x: String,
        y: String,
        short: usize,
        long: usize,
    },
    #[error("script start poset is not Koszul over Q (first witness n={n}, m={m}, dim={dim})")]
    StartNotKoszul { n: usize, m: usize, dim: usize },
    #[error("step kind {kind} requires a singleton frontier, got {got} elements")]
    SingletonKindArity { kind: u8, got: usize },
    #[error("unknown construction kind {0} (expected 1, 2, 3 or 4)")]
    UnknownKind(u8),
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Homology(#[from] bar::HomologyError),
}

fn offending_pair_suffix(pair: &Option<(String, String)>) -> String {
    match pair {
        Some((a, b)) => format!("; offending pair {a:?}, {b:?}"),
        None => String::new(),
    }
}

/// Adjoins a fresh maximal element `t` covering exactly the frontier.
///
/// Requires a graded input, condition (†) on the frontier, and a graded
/// result; covers constructions (1) (singleton frontier) and (3).
pub fn adjoin_above<S: AsRef<str>>(p: &Poset, t: &str, frontier: &[S]) -> Result<Poset, BuildError> {
    p.require_graded()?;
    if p.index_of(t).is_some() {
        return Err(BuildError::NameCollision(t.to_string()));
    }
    let check = p.check_dagger(frontier)?;
    if !check.satisfied {
        return Err(BuildError::DaggerViolation {
            reason: check
                .failure_reason
                .map(|r| r.to_string())
                .unwrap_or_default(),
            pair: check.offending_pair,
        });
    }
    let mut elements: Vec<String> = p.elements().to_vec();
    elements.push(t.to_string());
    let mut relations = p.cover_pairs();
    for u in frontier {
        relations.push((u.as_ref().to_string(), t.to_string()));
    }
    let extended = Poset::new(&elements, &relations)?;
    match extended.require_graded() {
        Ok(()) => Ok(extended),
        Err(PosetError::NotGraded { x, y, short, long }) => Err(BuildError::GradednessViolation {
            new_element: t.to_string(),
            x,
            y,
            short,
            long,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Adjoins a fresh minimal element `t` covered by exactly the frontier:
/// constructions (2) and (4), realized as `dual ∘ adjoin_above ∘ dual`.
pub fn adjoin_below<S: AsRef<str>>(p: &Poset, t: &str, frontier: &[S]) -> Result<Poset, BuildError> {
    match adjoin_above(&p.dual(), t, frontier) {
        Ok(r) => Ok(r.dual()),
        Err(BuildError::DaggerViolation { reason, pair }) => {
            Err(BuildError::DdaggerViolation { reason, pair })
        }
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------------------
// build scripts
// ---------------------------------------------------------------------------

/// A scripted sequence of adjoin steps applied to a start poset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BuildScript {
    pub start: StartSpec,
    pub steps: Vec<BuildStep>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    Generator {
        gen: String,
        #[serde(default)]
        args: Vec<serde_json::Value>,
    },
    Poset {
        elements: Vec<String>,
        covers: Vec<(String, String)>,
    },
}

/// One adjoin step. Kinds 1/3 adjoin above, 2/4 below; kinds 1 and 2
/// are the singleton cases and insist on a one-element frontier.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildStep {
    pub kind: u8,
    #[serde(rename = "new")]
    pub new_element: String,
    pub frontier: Vec<String>,
}

#[derive(Debug)]
pub struct BuildOutcome {
    pub poset: Poset,
    pub log: Vec<String>,
    /// True on every success: the start was verified Koszul and each step
    /// preserves Koszulity.
    pub certified: bool,
}

#[derive(Debug, Error)]
#[error("{error}")]
pub struct BuildFailure {
    pub error: BuildError,
    pub log: Vec<String>,
}

pub fn parse_script(text: &str) -> Result<BuildScript, serde_json::Error> {
    serde_json::from_str(text)
}

fn start_poset(spec: &StartSpec) -> Result<Poset, BuildError> {
    match spec {
        StartSpec::Generator { gen, args } => generate(&GeneratorSpec::from_json(gen, args)?),
        StartSpec::Poset { elements, covers } => Ok(Poset::new(elements, covers)?),
    }
}

/// Runs a script: verifies the start is graded and Koszul (over the
/// rationals), then applies each step with its frontier and gradedness
/// checks. The first failing step aborts with the partial log.
pub fn run_script(script: &BuildScript) -> Result<BuildOutcome, Box<BuildFailure>> {
    let mut log = Vec::new();
    let fail = |error: BuildError, log: Vec<String>| Box::new(BuildFailure { error, log });

    let mut poset = match start_poset(&script.start) {
        Ok(p) => p,
        Err(e) => return Err(fail(e, log)),
    };
    log.push(format!(
        "start: {} elements, {} covers",
        poset.len(),
        poset.covers().len()
    ));
    if let Err(e) = poset.require_graded() {
        return Err(fail(e.into(), log));
    }
    match bar::tor_table(&poset, FieldSpec::Rationals) {
        Ok(table) if table.koszul => log.push("start verified Koszul over Q".to_string()),
        Ok(table) => {
            let &(n, m, dim) = table.witnesses.first().expect("non-Koszul table has a witness");
            return Err(fail(BuildError::StartNotKoszul { n, m, dim }, log));
        }
        Err(e) => return Err(fail(e.into(), log)),
    }

    for (i, step) in script.steps.iter().enumerate() {
        let above = match step.kind {
            1 | 3 => true,
            2 | 4 => false,
            k => return Err(fail(BuildError::UnknownKind(k), log)),
        };
        if matches!(step.kind, 1 | 2) && step.frontier.len() != 1 {
            return Err(fail(
                BuildError::SingletonKindArity {
                    kind: step.kind,
                    got: step.frontier.len(),
                },
                log,
            ));
        }
        let result = if above {
            adjoin_above(&poset, &step.new_element, &step.frontier)
        } else {
            adjoin_below(&poset, &step.new_element, &step.frontier)
        };
        match result {
            Ok(next) => {
                let check = if above {
                    poset.check_dagger(&step.frontier)
                } else {
                    poset.check_ddagger(&step.frontier)
                }
                .expect("frontier already validated by the adjoin");
                let pivot = check
                    .pivot
                    .map(|s| format!(", pivot {s}"))
                    .unwrap_or_default();
                log.push(format!(
                    "step {}: kind {} adjoin {:?} {} {{{}}}{} ok, graded ok",
                    i + 1,
                    step.kind,
                    step.new_element,
                    if above { "above" } else { "below" },
                    step.frontier.join(", "),
                    pivot,
                ));
                poset = next;
            }
            Err(e) => {
                log.push(format!("step {}: FAILED: {e}", i + 1));
                return Err(fail(e, log));
            }
        }
    }
    log.push(format!(
        "done: {} elements, {} covers, Koszul by construction",
        poset.len(),
        poset.covers().len()
    ));
    Ok(BuildOutcome {
        poset,
        log,
        certified: true,
    })
}

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

/// The built-in poset families.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    /// The 4-element diamond s < u, v < t.
    Tile,
    /// Two disjoint length-3 paths with shared endpoints; the smallest
    /// graded poset with off-diagonal Tor.
    Hexagon,
    Chain(usize),
    Antichain(usize),
    /// s below u_1..u_n below t.
    VDiamond(usize),
    /// s_1..s_i below u, v below t_1..t_j.
    HDiamond(usize, usize),
    /// Union of grid tiles centered at the given positions.
    Tiling(Vec<(i64, i64)>),
    /// Layered random graded poset; reproducible from the seed.
    Random { seed: u64, size: usize, density: f64 },
}

impl GeneratorSpec {
    /// Parses the CLI form, e.g. `tile`, `chain:4`, `hdiamond:2,2`,
    /// `tiling:0,0;2,0`, `random:7,10,0.35`.
    pub fn parse(s: &str) -> Result<GeneratorSpec, BuildError> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let int = |a: &str| {
            a.parse::<usize>()
                .map_err(|_| BuildError::InvalidParameters(format!("{a:?} is not a count")))
        };
        match (name, args) {
            ("tile", None) => Ok(GeneratorSpec::Tile),
            ("hexagon", None) => Ok(GeneratorSpec::Hexagon),
            ("chain", Some(a)) => Ok(GeneratorSpec::Chain(int(a)?)),
            ("antichain", Some(a)) => Ok(GeneratorSpec::Antichain(int(a)?)),
            ("vdiamond", Some(a)) => Ok(GeneratorSpec::VDiamond(int(a)?)),
            ("hdiamond", Some(a)) => {
                let parts: Vec<&str> = a.split(',').collect();
                match parts.as_slice() {
                    [i, j] => Ok(GeneratorSpec::HDiamond(int(i)?, int(j)?)),
                    _ => Err(BuildError::InvalidParameters(
                        "hdiamond takes two counts, e.g. hdiamond:2,2".into(),
                    )),
                }
            }
            ("tiling", Some(a)) => {
                let mut positions = Vec::new();
                for part in a.split(';') {
                    let coords: Vec<&str> = part.split(',').collect();
                    let [x, y] = coords.as_slice() else {
                        return Err(BuildError::InvalidParameters(format!(
                            "tile position {part:?} is not x,y"
                        )));
                    };
                    let parse = |c: &str| {
                        c.parse::<i64>().map_err(|_| {
                            BuildError::InvalidParameters(format!("{c:?} is not an integer"))
                        })
                    };
                    positions.push((parse(x)?, parse(y)?));
                }
                Ok(GeneratorSpec::Tiling(positions))
            }
            ("random", Some(a)) => {
                let parts: Vec<&str> = a.split(',').collect();
                let [seed, size, density] = parts.as_slice() else {
                    return Err(BuildError::InvalidParameters(
                        "random takes seed,size,density".into(),
                    ));
                };
                let seed = seed
                    .parse::<u64>()
                    .map_err(|_| BuildError::InvalidParameters("bad seed".into()))?;
                let density = density
                    .parse::<f64>()
                    .map_err(|_| BuildError::InvalidParameters("bad density".into()))?;
                Ok(GeneratorSpec::Random {
                    seed,
                    size: int(size)?,
                    density,
                })
            }
            _ => Err(BuildError::UnknownGenerator(s.to_string())),
        }
    }

    /// Builds a spec from the JSON script form `{"gen": name, "args": [...]}`.
    pub fn from_json(name: &str, args: &[serde_json::Value]) -> Result<GeneratorSpec, BuildError> {
        let int = |v: &serde_json::Value| {
            v.as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| BuildError::InvalidParameters(format!("{v} is not a count")))
        };
        match (name, args) {
            ("tile", []) => Ok(GeneratorSpec::Tile),
            ("hexagon", []) => Ok(GeneratorSpec::Hexagon),
            ("chain", [n]) => Ok(GeneratorSpec::Chain(int(n)?)),
            ("antichain", [n]) => Ok(GeneratorSpec::Antichain(int(n)?)),
            ("vdiamond", [n]) => Ok(GeneratorSpec::VDiamond(int(n)?)),
            ("hdiamond", [i, j]) => Ok(GeneratorSpec::HDiamond(int(i)?, int(j)?)),
            ("tiling", positions) => {
                let mut out = Vec::new();
                for pos in positions {
                    let pair = pos.as_array().and_then(|a| {
                        if a.len() == 2 {
                            Some((a[0].as_i64()?, a[1].as_i64()?))
                        } else {
                            None
                        }
                    });
                    match pair {
                        Some(p) => out.push(p),
                        None => {
                            return Err(BuildError::InvalidParameters(format!(
                                "tile position {pos} is not [x, y]"
                            )))
                        }
                    }
                }
                Ok(GeneratorSpec::Tiling(out))
            }
            ("random", [seed, size, density]) => Ok(GeneratorSpec::Random {
                seed: seed
                    .as_u64()
                    .ok_or_else(|| BuildError::InvalidParameters("bad seed".into()))?,
                size: int(size)?,
                density: density
                    .as_f64()
                    .ok_or_else(|| BuildError::InvalidParameters("bad density".into()))?,
            }),
            (n, _) if !matches!(
                n,
                "tile" | "hexagon" | "chain" | "antichain" | "vdiamond" | "hdiamond" | "tiling"
                    | "random"
            ) =>
            {
                Err(BuildError::UnknownGenerator(n.to_string()))
            }
            _ => Err(BuildError::InvalidParameters(format!(
                "wrong arguments for generator {name:?}"
            ))),
        }
    }
}

/// Builds the requested family.
pub fn generate(spec: &GeneratorSpec) -> Result<Poset, BuildError> {
    let positive = |n: usize, what: &str| {
        if n < 1 {
            Err(BuildError::InvalidParameters(format!("{what} needs n >= 1")))
        } else {
            Ok(n)
        }
    };
    let poset = match spec {
        GeneratorSpec::Tile => Poset::new(
            &["s", "u", "v", "t"],
            &[("s", "u"), ("s", "v"), ("u", "t"), ("v", "t")],
        )?,
        GeneratorSpec::Hexagon => Poset::new(
            &["s", "x", "y", "u", "v", "t"],
            &[("s", "x"), ("s", "v"), ("x", "u"), ("v", "y"), ("u", "t"), ("y", "t")],
        )?,
        GeneratorSpec::Chain(n) => {
            let n = positive(*n, "chain")?;
            let names: Vec<String> = (1..=n).map(|i| format!("c{i}")).collect();
            let rels: Vec<(String, String)> = names
                .windows(2)
                .map(|w| (w[0].clone(), w[1].clone()))
                .collect();
            Poset::new(&names, &rels)?
        }
        GeneratorSpec::Antichain(n) => {
            let n = positive(*n, "antichain")?;
            let names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
            Poset::new(&names, &[])?
        }
        GeneratorSpec::VDiamond(n) => {
            let n = positive(*n, "vdiamond")?;
            let mut names = vec!["s".to_string()];
            names.extend((1..=n).map(|i| format!("u{i}")));
            names.push("t".to_string());
            let mut rels = Vec::new();
            for i in 1..=n {
                rels.push(("s".to_string(), format!("u{i}")));
                rels.push((format!("u{i}"), "t".to_string()));
            }
            Poset::new(&names, &rels)?
        }
        GeneratorSpec::HDiamond(i, j) => {
            let i = positive(*i, "hdiamond")?;
            let j = positive(*j, "hdiamond")?;
            let mut names: Vec<String> = (1..=i).map(|p| format!("s{p}")).collect();
            names.push("u".to_string());
            names.push("v".to_string());
            names.extend((1..=j).map(|q| format!("t{q}")));
            let mut rels = Vec::new();
            for p in 1..=i {
                rels.push((format!("s{p}"), "u".to_string()));
                rels.push((format!("s{p}"), "v".to_string()));
            }
            for q in 1..=j {
                rels.push(("u".to_string(), format!("t{q}")));
                rels.push(("v".to_string(), format!("t{q}")));
            }
            Poset::new(&names, &rels)?
        }
        GeneratorSpec::Tiling(positions) => {
            if positions.is_empty() {
                return Err(BuildError::InvalidParameters(
                    "tiling needs at least one tile".into(),
                ));
            }
            let mut points: BTreeSet<(i64, i64)> = BTreeSet::new();
            let mut edges: BTreeSet<((i64, i64), (i64, i64))> = BTreeSet::new();
            for &(px, qy) in positions {
                let s = (px, qy - 1);
                let u = (px - 1, qy);
                let v = (px + 1, qy);
                let t = (px, qy + 1);
                points.extend([s, u, v, t]);
                edges.extend([(s, u), (s, v), (u, t), (v, t)]);
            }
            // grid points ordered by height, then left to right
            let mut ordered: Vec<(i64, i64)> = points.into_iter().collect();
            ordered.sort_by_key(|&(x, y)| (y, x));
            let name = |(x, y): (i64, i64)| format!("({x},{y})");
            let names: Vec<String> = ordered.iter().map(|&p| name(p)).collect();
            let rels: Vec<(String, String)> =
                edges.into_iter().map(|(a, b)| (name(a), name(b))).collect();
            Poset::new(&names, &rels)?
        }
        GeneratorSpec::Random {
            seed,
            size,
            density,
        } => {
            let size = positive(*size, "random")?;
            if !(0.0..=1.0).contains(density) {
                return Err(BuildError::InvalidParameters(
                    "density must lie in [0, 1]".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let layer_count = rng.gen_range(1..=size.min(4));
            let layers: Vec<usize> = (0..size).map(|_| rng.gen_range(0..layer_count)).collect();
            let mut order: Vec<usize> = (0..size).collect();
            order.sort_by_key(|&i| (layers[i], i));
            let names: Vec<String> = order.iter().map(|&i| format!("e{i}")).collect();
            let mut rels = Vec::new();
            for (a, &i) in order.iter().enumerate() {
                for (b, &j) in order.iter().enumerate() {
                    if layers[j] == layers[i] + 1 && rng.gen_bool(*density) {
                        rels.push((names[a].clone(), names[b].clone()));
                    }
                }
            }
            Poset::new(&names, &rels)?
        }
    };
    Ok(poset)
}
