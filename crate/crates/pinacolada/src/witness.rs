//! Counterexample witnesses and run reports.
//!
//! Two serializations are produced: a JSON form carrying the witness or the
//! whole run report verbatim, and a simplified GraphML automaton. The GraphML
//! uses a minimal key set — `assumption`, `startline`, `control` — and makes
//! no claim of conformance to any external witness schema. Violation
//! witnesses hold the input valuation (as decimal strings, width-agnostic)
//! and the branch trace of the failing path; for safe programs only a
//! metadata stub is written.

use crate::explorer::{ExploreStats, ExplorerConfig, Mode, Outcome, Strategy, Verdict, Violation};
use crate::semantics::Value;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> ToolInfo {
        ToolInfo {
            name: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
        }
    }
}

/// The configuration a verdict was produced under, echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub int_width: u32,
    pub strategy: String,
    pub mode: String,
    pub unwind: Option<u32>,
}

impl ConfigEcho {
    pub fn from_config(cfg: &ExplorerConfig) -> ConfigEcho {
        ConfigEcho {
            int_width: cfg.width,
            strategy: match cfg.strategy {
                Strategy::Dfs => "dfs",
                Strategy::Bfs => "bfs",
            }
            .to_string(),
            mode: match cfg.mode {
                Mode::FullIncremental => "full-incremental",
                Mode::PartialIncremental => "partial-incremental",
            }
            .to_string(),
            unwind: cfg.unwind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertLocation {
    pub function: String,
    pub instruction_index: usize,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessInput {
    pub ordinal: usize,
    pub variable: String,
    /// Decimal string; booleans are "0"/"1".
    pub value: String,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessBranch {
    pub function: String,
    pub instruction_index: usize,
    pub taken: bool,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Always "violation".
    pub kind: String,
    pub tool: ToolInfo,
    pub config: ConfigEcho,
    pub assert_location: AssertLocation,
    pub nondet_inputs: Vec<WitnessInput>,
    pub branch_trace: Vec<WitnessBranch>,
}

fn decimal(v: Value) -> String {
    match v {
        Value::Int(n) => n.to_string(),
        Value::Bool(b) => (b as i64).to_string(),
    }
}

impl Witness {
    pub fn from_violation(v: &Violation, cfg: &ExplorerConfig) -> Witness {
        Witness {
            kind: "violation".to_string(),
            tool: ToolInfo::current(),
            config: ConfigEcho::from_config(cfg),
            assert_location: AssertLocation {
                function: v.function.clone(),
                instruction_index: v.index,
                line: v.loc.line,
            },
            nondet_inputs: v
                .inputs
                .iter()
                .map(|i| WitnessInput {
                    ordinal: i.ordinal,
                    variable: i.var.clone(),
                    value: decimal(i.value),
                    line: i.loc.line,
                })
                .collect(),
            branch_trace: v
                .branches
                .iter()
                .map(|b| WitnessBranch {
                    function: b.function.clone(),
                    instruction_index: b.index,
                    taken: b.taken,
                    line: b.loc.line,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serializes")
    }

    /// Render the witness as a linear GraphML automaton: one node per trace
    /// step, input assumptions first, then the branch decisions, then the
    /// violation step carrying the failed assertion's line.
    pub fn to_graphml(&self) -> String {
        let mut edges: Vec<String> = Vec::new();
        for inp in &self.nondet_inputs {
            edges.push(format!(
                "      <data key=\"assumption\">{}</data>\n      <data key=\"startline\">{}</data>",
                xml_escape(&format!("{} == {}", inp.variable, inp.value)),
                inp.line
            ));
        }
        for b in &self.branch_trace {
            let control = if b.taken { "condition-true" } else { "condition-false" };
            edges.push(format!(
                "      <data key=\"control\">{control}</data>\n      <data key=\"startline\">{}</data>",
                b.line
            ));
        }
        edges.push(format!(
            "      <data key=\"startline\">{}</data>",
            self.assert_location.line
        ));

        let mut g = graphml_header();
        g.push_str("  <graph edgedefault=\"directed\">\n");
        g.push_str("    <data key=\"witness-type\">violation_witness</data>\n");
        let _ = writeln!(
            g,
            "    <data key=\"producer\">{}</data>",
            xml_escape(&format!("{} {}", self.tool.name, self.tool.version))
        );
        g.push_str("    <node id=\"n0\"/>\n");
        for (i, data) in edges.iter().enumerate() {
            let _ = writeln!(g, "    <node id=\"n{}\"/>", i + 1);
            let _ = writeln!(
                g,
                "    <edge source=\"n{}\" target=\"n{}\">\n{}\n    </edge>",
                i,
                i + 1,
                data
            );
        }
        g.push_str("  </graph>\n</graphml>\n");
        g
    }
}

/// Metadata-only stub written for `--graphml-witness` on a SAFE verdict.
pub fn correctness_graphml(cfg: &ExplorerConfig) -> String {
    let mut g = graphml_header();
    g.push_str("  <graph edgedefault=\"directed\">\n");
    g.push_str("    <data key=\"witness-type\">correctness_witness</data>\n");
    let _ = writeln!(
        g,
        "    <data key=\"producer\">{}</data>",
        xml_escape(&format!("{} {}", TOOL_NAME, TOOL_VERSION))
    );
    let echo = ConfigEcho::from_config(cfg);
    let _ = writeln!(
        g,
        "    <data key=\"configuration\">{}</data>",
        xml_escape(&format!(
            "width={} strategy={} mode={}",
            echo.int_width, echo.strategy, echo.mode
        ))
    );
    g.push_str("    <node id=\"n0\"/>\n");
    g.push_str("  </graph>\n</graphml>\n");
    g
}

fn graphml_header() -> String {
    String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n\
         \x20 <key id=\"witness-type\" attr.name=\"witness-type\" attr.type=\"string\" for=\"graph\"/>\n\
         \x20 <key id=\"producer\" attr.name=\"producer\" attr.type=\"string\" for=\"graph\"/>\n\
         \x20 <key id=\"configuration\" attr.name=\"configuration\" attr.type=\"string\" for=\"graph\"/>\n\
         \x20 <key id=\"assumption\" attr.name=\"assumption\" attr.type=\"string\" for=\"edge\"/>\n\
         \x20 <key id=\"startline\" attr.name=\"startline\" attr.type=\"int\" for=\"edge\"/>\n\
         \x20 <key id=\"control\" attr.name=\"control\" attr.type=\"string\" for=\"edge\"/>\n",
    )
}

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Everything a run produced, JSON-serializable with stable field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// "SAFE" | "UNSAFE" | "RESOURCE_LIMIT"
    pub verdict: String,
    pub bounded: bool,
    /// Which budget ran out, for RESOURCE_LIMIT verdicts.
    pub reason: Option<String>,
    pub tool: ToolInfo,
    pub config: ConfigEcho,
    pub wall_time_ms: u64,
    pub stats: ExploreStats,
    pub witness: Option<Witness>,
}

impl RunReport {
    pub fn new(verdict: &Verdict, cfg: &ExplorerConfig, wall_time_ms: u64) -> RunReport {
        let (name, reason, witness) = match &verdict.outcome {
            Outcome::Safe => ("SAFE", None, None),
            Outcome::Unsafe(v) => ("UNSAFE", None, Some(Witness::from_violation(v, cfg))),
            Outcome::ResourceLimit(r) => ("RESOURCE_LIMIT", Some(r.clone()), None),
        };
        RunReport {
            verdict: name.to_string(),
            bounded: verdict.bounded,
            reason,
            tool: ToolInfo::current(),
            config: ConfigEcho::from_config(cfg),
            wall_time_ms,
            stats: verdict.stats.clone(),
            witness,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
