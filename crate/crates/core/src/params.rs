//! TOML parameter files.
//!
//! A file holds up to three sections, `[idea]`, `[de]` and `[mbh]`, with
//! nested tables for the DE and local-search settings:
//!
//! ```toml
//! [idea]
//! n_pop = 20
//! tol_conv = 0.25
//! delta = 0.2
//! iun_max = 4
//!
//! [idea.de]
//! step_size = 0.9
//! crossover = 0.9
//! strategy = "best"           # best | rand
//! index_mode = "allow_i1_eq_i2"
//!
//! [idea.local]
//! budget = 0                  # 0 means 500 d
//!
//! [de]
//! n_pop = 30
//! [de.params]
//! step_size = 0.75
//!
//! [mbh]
//! delta = 0.1
//! n_samples = 30
//! ```
//!
//! Keys left out keep the defaults tuned for the problem, so an empty file
//! resolves to the same settings as no file at all.

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::de::DeParams;
use crate::error::{Error, Result};
use crate::harness::Algorithm;
use crate::idea::IdeaParams;
use crate::mbh::MbhParams;
use crate::problems::Problem;

/// DE baseline settings as they appear under `[de]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeBaseline {
    pub n_pop: usize,
    pub params: DeParams,
}

const SECTIONS: [&str; 3] = ["idea", "de", "mbh"];

fn section_of(algorithm: &Algorithm) -> &'static str {
    match algorithm {
        Algorithm::Idea(_) => "idea",
        Algorithm::De { .. } => "de",
        Algorithm::Mbh(_) => "mbh",
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Value::try_from(v).map_err(|e| Error::Parse(e.to_string()))
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Table(b), Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn parse_table(text: &str) -> Result<Table> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    if let Some(bad) = table.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown section [{bad}]")));
    }
    Ok(table)
}

/// Settings for `name` on `problem`, overridden by the matching section of
/// `file` when given. Other sections are checked for syntax only.
pub fn resolve(name: &str, problem: &Problem, file: Option<&str>) -> Result<Algorithm> {
    let default = Algorithm::by_name(name, problem)?;
    let Some(text) = file else {
        return Ok(default);
    };
    let mut table = parse_table(text)?;
    let section = section_of(&default);
    let Some(over) = table.remove(section) else {
        return Ok(default);
    };
    if !over.is_table() {
        return Err(Error::Parse(format!("[{section}] must be a table")));
    }
    let mut base = to_value(&Resolved::from(&default))?;
    merge(&mut base, over);
    // Decoding from text makes error messages quote the offending line.
    let text = toml::to_string(&base).map_err(|e| Error::Parse(e.to_string()))?;
    let err = |e: toml::de::Error| Error::Parse(format!("[{section}]: {e}"));
    let algorithm = match default {
        Algorithm::Idea(_) => Algorithm::Idea(toml::from_str(&text).map_err(err)?),
        Algorithm::De { .. } => {
            let b: DeBaseline = toml::from_str(&text).map_err(err)?;
            Algorithm::De {
                params: b.params,
                n_pop: b.n_pop,
            }
        }
        Algorithm::Mbh(_) => Algorithm::Mbh(toml::from_str(&text).map_err(err)?),
    };
    Ok(algorithm)
}

#[derive(Serialize)]
#[serde(untagged)]
enum Resolved {
    Idea(IdeaParams),
    De(DeBaseline),
    Mbh(MbhParams),
}

impl From<&Algorithm> for Resolved {
    fn from(a: &Algorithm) -> Self {
        match a {
            Algorithm::Idea(p) => Resolved::Idea(p.clone()),
            Algorithm::De { params, n_pop } => Resolved::De(DeBaseline {
                n_pop: *n_pop,
                params: params.clone(),
            }),
            Algorithm::Mbh(p) => Resolved::Mbh(p.clone()),
        }
    }
}

/// The full parameter set of `algorithm` as a file that `resolve` reads back
/// to the same settings.
pub fn to_toml(algorithm: &Algorithm) -> Result<String> {
    let mut table = Table::new();
    table.insert(section_of(algorithm).to_string(), to_value(&Resolved::from(algorithm))?);
    toml::to_string(&table).map_err(|e| Error::Parse(e.to_string()))
}
