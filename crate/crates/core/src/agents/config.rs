use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const DEFAULT_EXPLORATION: f64 = 1.414;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentKind {
    Random,
    FlatMC,
    #[serde(rename = "UCT")]
    Uct,
}

/// How an agent chooses moves.
///
/// The text form is `kind[:budget[:c]]`, e.g. `random`, `flatmc:200`,
/// `uct:2000:1.414`. In JSON either that string or an object
/// `{"kind": "UCT", "iterationBudget": 2000, ...}` is accepted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgentConfig {
    pub kind: AgentKind,
    pub iteration_budget: u32,
    pub exploration: f64,
    /// Mixed into the per-trial seed of this agent's random stream.
    pub seed: u64,
}

impl AgentConfig {
    pub fn random() -> Self {
        AgentConfig {
            kind: AgentKind::Random,
            iteration_budget: 0,
            exploration: DEFAULT_EXPLORATION,
            seed: 0,
        }
    }

    pub fn flat_mc(budget: u32) -> Self {
        AgentConfig {
            kind: AgentKind::FlatMC,
            iteration_budget: budget,
            ..Self::random()
        }
    }

    pub fn uct(budget: u32) -> Self {
        AgentConfig {
            kind: AgentKind::Uct,
            iteration_budget: budget,
            ..Self::random()
        }
    }

    pub fn is_search(&self) -> bool {
        self.kind != AgentKind::Random
    }

    pub fn check(&self) -> Result<(), String> {
        if self.is_search() && self.iteration_budget == 0 {
            return Err("search agents need an iteration budget of at least 1".into());
        }
        if !(self.exploration > 0.0 && self.exploration.is_finite()) {
            return Err(format!("exploration constant must be positive, got {}", self.exploration));
        }
        Ok(())
    }
}

impl fmt::Display for AgentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            AgentKind::Random => f.write_str("random"),
            AgentKind::FlatMC => write!(f, "flatmc:{}", self.iteration_budget),
            AgentKind::Uct if self.exploration == DEFAULT_EXPLORATION => write!(f, "uct:{}", self.iteration_budget),
            AgentKind::Uct => write!(f, "uct:{}:{}", self.iteration_budget, self.exploration),
        }
    }
}

impl FromStr for AgentConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let budget = parts
            .next()
            .map(|b| b.parse::<u32>().map_err(|_| format!("bad iteration budget `{b}` in `{s}`")))
            .transpose()?;
        let c = parts
            .next()
            .map(|c| c.parse::<f64>().map_err(|_| format!("bad exploration constant `{c}` in `{s}`")))
            .transpose()?;
        if parts.next().is_some() {
            return Err(format!("too many fields in agent `{s}`"));
        }
        let mut config = match kind.as_str() {
            "random" if budget.is_none() => AgentConfig::random(),
            "flatmc" | "mc" if c.is_none() => AgentConfig::flat_mc(budget.unwrap_or(1000)),
            "uct" | "mcts" => AgentConfig::uct(budget.unwrap_or(1000)),
            _ => return Err(format!("unknown agent `{s}`; expected random, flatmc[:budget] or uct[:budget[:c]]")),
        };
        if let Some(c) = c {
            config.exploration = c;
        }
        config.check()?;
        Ok(config)
    }
}

impl Serialize for AgentConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        if self.seed == 0 {
            return s.serialize_str(&self.to_string());
        }
        let mut st = s.serialize_struct("AgentConfig", 4)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("iterationBudget", &self.iteration_budget)?;
        st.serialize_field("explorationConstant", &self.exploration)?;
        st.serialize_field("seed", &self.seed)?;
        st.end()
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ConfigObject {
    kind: AgentKind,
    #[serde(default)]
    iteration_budget: Option<u32>,
    #[serde(default)]
    exploration_constant: Option<f64>,
    #[serde(default)]
    seed: u64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigRepr {
    Text(String),
    Object(ConfigObject),
}

impl<'de> Deserialize<'de> for AgentConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match ConfigRepr::deserialize(d)? {
            ConfigRepr::Text(t) => t.parse().map_err(D::Error::custom),
            ConfigRepr::Object(o) => {
                let config = AgentConfig {
                    kind: o.kind,
                    iteration_budget: o.iteration_budget.unwrap_or(if o.kind == AgentKind::Random { 0 } else { 1000 }),
                    exploration: o.exploration_constant.unwrap_or(DEFAULT_EXPLORATION),
                    seed: o.seed,
                };
                config.check().map_err(D::Error::custom)?;
                Ok(config)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        for s in ["random", "flatmc:200", "uct:1000", "uct:2000:0.7"] {
            let c: AgentConfig = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        let c: AgentConfig = "UCT:50:1.414".parse().unwrap();
        assert_eq!(c, AgentConfig::uct(50));
    }

    #[test]
    fn rejects_bad_configs() {
        for s in ["", "minimax", "uct:0", "uct:10:-1", "random:5", "uct:x", "uct:1:1:1"] {
            assert!(s.parse::<AgentConfig>().is_err(), "{s}");
        }
    }

    #[test]
    fn json_forms() {
        let a: AgentConfig = serde_json::from_str(r#""uct:300""#).unwrap();
        let b: AgentConfig =
            serde_json::from_str(r#"{"kind": "UCT", "iterationBudget": 300, "explorationConstant": 1.414}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), r#""uct:300""#);
        assert!(serde_json::from_str::<AgentConfig>(r#"{"kind": "UCT", "iterationBudget": 0}"#).is_err());
        let seeded = AgentConfig { seed: 9, ..AgentConfig::flat_mc(20) };
        let text = serde_json::to_string(&seeded).unwrap();
        assert_eq!(serde_json::from_str::<AgentConfig>(&text).unwrap(), seeded);
    }
}
