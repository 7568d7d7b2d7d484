//! JSON-lines instance files.
//!
//! Line 1 is a header:
//! `{"n":2,"agents":[{"alpha":5,"beta":1},...],"flavor":"two_value","foresight":1}`.
//! Every further line is one good, `{"high":[true,false]}` for two-value
//! instances or `{"values":[2.5,1.0]}` for interval instances.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Flavor, GoodEvent, GoodValues, Instance};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    n: usize,
    agents: Vec<AgentRecord>,
    flavor: Flavor,
    #[serde(default)]
    foresight: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentRecord {
    alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum GoodLine {
    High { high: Vec<bool> },
    Values { values: Vec<f64> },
}

pub fn read_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let fail = |line, message: String| ParseError { line, message };
    let (hline, htext) = lines
        .next()
        .ok_or_else(|| fail(1, "missing header".into()))?;
    let header: Header =
        serde_json::from_str(htext).map_err(|e| fail(hline, format!("bad header: {e}")))?;
    if header.n != header.agents.len() {
        return Err(fail(
            hline,
            format!("n = {} but {} agents listed", header.n, header.agents.len()),
        ));
    }
    let profiles = header
        .agents
        .iter()
        .enumerate()
        .map(|(i, a)| match (a.beta, header.flavor) {
            (Some(b), _) => Ok((a.alpha, b)),
            (None, Flavor::IntervalRestricted) => Ok((a.alpha, 1.0)),
            (None, Flavor::TwoValue) => Err(fail(hline, format!("agent {} has no beta", i + 1))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut inst = Instance::new(&profiles, Vec::new(), header.flavor, header.foresight)
        .map_err(|e| fail(hline, e.to_string()))?;
    for (line, text) in lines {
        let parsed: GoodLine =
            serde_json::from_str(text).map_err(|e| fail(line, format!("bad good: {e}")))?;
        let values = match parsed {
            GoodLine::High { high } => GoodValues::HighLowMask(high),
            GoodLine::Values { values } => GoodValues::RealVector(values),
        };
        let good = GoodEvent {
            index: inst.m() + 1,
            values,
        };
        inst.validate_good(&good, inst.m() + 1)
            .map_err(|e| fail(line, e.to_string()))?;
        inst.goods.push(good);
    }
    Ok(inst)
}

pub fn write_instance(inst: &Instance) -> String {
    let header = Header {
        n: inst.n(),
        agents: inst
            .agents
            .iter()
            .map(|a| AgentRecord {
                alpha: a.alpha,
                beta: Some(a.beta),
            })
            .collect(),
        flavor: inst.flavor,
        foresight: inst.foresight,
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for g in &inst.goods {
        let line = match &g.values {
            GoodValues::HighLowMask(h) => GoodLine::High { high: h.clone() },
            GoodValues::RealVector(v) => GoodLine::Values { values: v.clone() },
        };
        out.push_str(&serde_json::to_string(&line).expect("good serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "{\"n\":2,\"agents\":[{\"alpha\":5.0,\"beta\":1.0},{\"alpha\":1.0,\"beta\":0.0}],\"flavor\":\"two_value\",\"foresight\":1}\n{\"high\":[true,false]}\n{\"high\":[false,false]}\n";
        let inst = read_instance(text).unwrap();
        assert_eq!(inst.m(), 2);
        assert_eq!(inst.foresight, 1);
        assert_eq!(write_instance(&inst), text);
    }

    #[test]
    fn interval_defaults_beta() {
        let text = "{\"n\":1,\"agents\":[{\"alpha\":9}],\"flavor\":\"interval\",\"foresight\":0}\n{\"values\":[2.5]}\n";
        let inst = read_instance(text).unwrap();
        assert_eq!(inst.agents[0].beta, 1.0);
        assert_eq!(inst.value(0, 1), 2.5);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let head = "{\"n\":2,\"agents\":[{\"alpha\":5,\"beta\":1},{\"alpha\":5,\"beta\":1}],\"flavor\":\"two_value\"}\n";
        let e = read_instance(&format!(
            "{head}{{\"high\":[true,false]}}\n{{\"high\":[true]}}\n"
        ))
        .unwrap_err();
        assert_eq!(e.line, 3);
        let e = read_instance(&format!("{head}{{\"values\":[1.0,2.0]}}\n")).unwrap_err();
        assert_eq!(e.line, 2);
        let e = read_instance("{\"n\":3,\"agents\":[],\"flavor\":\"two_value\"}").unwrap_err();
        assert_eq!(e.line, 1);
        let e = read_instance(&format!("{head}not json\n")).unwrap_err();
        assert_eq!(e.line, 2);
    }
}
