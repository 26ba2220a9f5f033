//! JSON instance files.
//!
//! ```json
//! {"agents": 2, "items": 2, "class": "additive",
//!  "valuations": [{"kind": "additive", "values": ["1", "1/2"]},
//!                 {"kind": "table", "entries": {"0": "0", "1": "1/2", "2": "0", "3": "1/2"}}]}
//! ```
//!
//! Rationals are strings `"p/q"` or `"p"`. Table keys are decimal bitmasks
//! and must cover all 2^m subsets. A `sqrt_cardinality` valuation takes an
//! optional `"scale"` (default 1).

use std::collections::BTreeMap;

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{Instance, Valuation, ValuationClass};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};
use crate::surd::Surd;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub agents: usize,
    pub items: usize,
    pub class: ValuationClass,
    pub valuations: Vec<ValuationFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ValuationFile {
    #[serde(rename = "additive")]
    Additive { values: Vec<String> },
    #[serde(rename = "table")]
    Table { entries: BTreeMap<String, String> },
    #[serde(rename = "sqrt_cardinality")]
    SqrtCardinality {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<String>,
    },
}

/// An instance in whichever exact arithmetic its valuations need.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyInstance {
    Rational(Instance<Rational>),
    Surd(Instance<Surd>),
}

impl AnyInstance {
    pub fn agents(&self) -> usize {
        match self {
            AnyInstance::Rational(i) => i.agents(),
            AnyInstance::Surd(i) => i.agents(),
        }
    }

    pub fn items(&self) -> usize {
        match self {
            AnyInstance::Rational(i) => i.items(),
            AnyInstance::Surd(i) => i.items(),
        }
    }

    pub fn class(&self) -> ValuationClass {
        match self {
            AnyInstance::Rational(i) => i.class(),
            AnyInstance::Surd(i) => i.class(),
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            AnyInstance::Rational(i) => instance_to_json(i),
            AnyInstance::Surd(i) => instance_to_json(i),
        }
    }
}

/// Parse and validate an instance file, choosing rational arithmetic unless
/// some valuation needs square roots.
pub fn load_instance(text: &str) -> Result<AnyInstance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let needs_surd = file
        .valuations
        .iter()
        .any(|v| matches!(v, ValuationFile::SqrtCardinality { .. }));
    if needs_surd {
        Ok(AnyInstance::Surd(instance_from_file(&file)?))
    } else {
        Ok(AnyInstance::Rational(instance_from_file(&file)?))
    }
}

pub fn parse_instance<T: Scalar>(text: &str) -> Result<Instance<T>> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    instance_from_file(&file)
}

pub fn instance_from_file<T: Scalar>(file: &InstanceFile) -> Result<Instance<T>> {
    if file.valuations.len() != file.agents {
        return Err(Error::Parse(format!(
            "\"agents\" is {} but {} valuations were given",
            file.agents,
            file.valuations.len()
        )));
    }
    let m = file.items;
    let mut valuations = Vec::with_capacity(file.agents);
    for (agent, v) in file.valuations.iter().enumerate() {
        valuations.push(match v {
            ValuationFile::Additive { values } => Valuation::Additive(
                values
                    .iter()
                    .map(|s| scalar_from_str(s, agent))
                    .collect::<Result<_>>()?,
            ),
            ValuationFile::Table { entries } => {
                if m > super::MAX_TABLE_ITEMS {
                    return Err(Error::TooLarge(format!(
                        "explicit tables support at most {} items",
                        super::MAX_TABLE_ITEMS
                    )));
                }
                let size = 1usize << m;
                let mut table: Vec<Option<T>> = vec![None; size];
                for (key, value) in entries {
                    let mask: usize = key.trim().parse().map_err(|_| {
                        Error::Parse(format!("agent {agent}: bad table key {key:?}"))
                    })?;
                    if mask >= size {
                        return Err(Error::Parse(format!(
                            "agent {agent}: table key {mask} out of range for {m} items"
                        )));
                    }
                    table[mask] = Some(scalar_from_str(value, agent)?);
                }
                if let Some(missing) = table.iter().position(Option::is_none) {
                    return Err(Error::Parse(format!(
                        "agent {agent}: table is missing subset {missing}"
                    )));
                }
                Valuation::Table(table.into_iter().map(Option::unwrap).collect())
            }
            ValuationFile::SqrtCardinality { scale } => Valuation::SqrtCardinality {
                scale: match scale {
                    Some(s) => scalar_from_str(s, agent)?,
                    None => T::from_rational(&Rational::one()),
                },
            },
        });
    }
    Instance::new(m, file.class, valuations)
}

fn scalar_from_str<T: Scalar>(s: &str, agent: usize) -> Result<T> {
    T::parse_exact(s).ok_or_else(|| Error::Parse(format!("agent {agent}: bad number {s:?}")))
}

pub fn instance_to_file<T: Scalar>(inst: &Instance<T>) -> InstanceFile {
    InstanceFile {
        agents: inst.agents(),
        items: inst.items(),
        class: inst.class(),
        valuations: inst
            .valuations()
            .iter()
            .map(|v| match v {
                Valuation::Additive(values) => ValuationFile::Additive {
                    values: values.iter().map(ToString::to_string).collect(),
                },
                Valuation::Table(table) => ValuationFile::Table {
                    entries: table
                        .iter()
                        .enumerate()
                        .map(|(mask, x)| (mask.to_string(), x.to_string()))
                        .collect(),
                },
                Valuation::SqrtCardinality { scale } => ValuationFile::SqrtCardinality {
                    scale: (!scale.is_one()).then(|| scale.to_string()),
                },
            })
            .collect(),
    }
}

pub fn instance_to_json<T: Scalar>(inst: &Instance<T>) -> String {
    serde_json::to_string_pretty(&instance_to_file(inst)).expect("instance serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ItemSet;

    #[test]
    fn loads_example_file() {
        let text = r#"{"agents":2,"items":2,"class":"additive",
            "valuations":[{"kind":"additive","values":["1","1/2"]},
                          {"kind":"additive","values":["1/2","1/100"]}]}"#;
        let AnyInstance::Rational(inst) = load_instance(text).unwrap() else {
            panic!("expected rational instance");
        };
        assert_eq!(inst.agents(), 2);
        assert_eq!(inst.items(), 2);
        assert!(inst.class_verified());
        assert_eq!(
            inst.value(0, ItemSet::full(2)),
            Rational::new(3.into(), 2.into())
        );
        let again = load_instance(&instance_to_json(&inst)).unwrap();
        assert_eq!(again, AnyInstance::Rational(inst));
    }

    #[test]
    fn table_and_sqrt_kinds() {
        let text = r#"{"agents":2,"items":2,"class":"subadditive","valuations":[
            {"kind":"table","entries":{"0":"0","1":"1/2","2":"1/2","3":"1"}},
            {"kind":"sqrt_cardinality"}]}"#;
        let AnyInstance::Surd(inst) = load_instance(text).unwrap() else {
            panic!("expected surd instance");
        };
        assert_eq!(inst.value(1, ItemSet::full(2)), Surd::sqrt(2));
        let back = load_instance(&instance_to_json(&inst)).unwrap();
        assert_eq!(back, AnyInstance::Surd(inst));
    }

    #[test]
    fn reports_bad_files() {
        let missing = r#"{"agents":1,"items":1,"class":"monotone",
            "valuations":[{"kind":"table","entries":{"0":"0"}}]}"#;
        assert!(matches!(load_instance(missing), Err(Error::Parse(_))));
        let nonzero = r#"{"agents":1,"items":1,"class":"monotone",
            "valuations":[{"kind":"table","entries":{"0":"1/2","1":"1"}}]}"#;
        let err = load_instance(nonzero).unwrap_err();
        assert!(err.to_string().contains("nonzero empty-set value"));
        let count = r#"{"agents":2,"items":1,"class":"additive",
            "valuations":[{"kind":"additive","values":["1"]}]}"#;
        assert!(matches!(load_instance(count), Err(Error::Parse(_))));
        assert!(matches!(load_instance("{"), Err(Error::Parse(_))));
    }
}
