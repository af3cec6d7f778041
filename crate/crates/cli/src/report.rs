//! JSON report envelope shared by every subcommand.

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Report<B> {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub input_files: Vec<String>,
    /// 0 for commands that draw no random numbers.
    pub seed: u64,
    pub mode: String,
    pub verdict: &'static str,
    #[serde(flatten)]
    pub body: B,
    pub notes: Vec<String>,
}

impl<B: Serialize> Report<B> {
    pub fn new(command: &'static str, mode: impl Into<String>, pass: bool, body: B) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            input_files: Vec::new(),
            seed: 0,
            mode: mode.into(),
            verdict: if pass { "pass" } else { "fail" },
            body,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report types serialize");
        s.push('\n');
        s
    }
}

/// `(a, b, c, d)` to six decimals.
pub fn point(p: &[f64; 4]) -> String {
    format!("({:.6}, {:.6}, {:.6}, {:.6})", p[0], p[1], p[2], p[3])
}
