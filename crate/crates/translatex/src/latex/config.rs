//! Data-driven knobs for the parser.
//!
//! Which environments stay opaque, which are math, which commands are
//! headings and which command arguments are natural language is
//! configuration, not code, so a document with custom environments can be
//! handled by editing a config file instead of the parser.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ParserConfig {
    /// Environments whose bodies are kept byte-for-byte (never parsed,
    /// never translated).
    pub opaque_environments: Vec<String>,
    /// Equation-family environments; their bodies become display math.
    pub equation_environments: Vec<String>,
    /// Sectioning commands mapped to heading levels 1..5.
    pub heading_commands: Vec<(String, u8)>,
    /// Commands whose argument is translated as part of the surrounding
    /// sentence (the wrapper is dropped in translated output).
    pub span_commands: Vec<String>,
    /// Commands whose argument is translated as its own unit (the wrapper
    /// is preserved): captions, titles, footnotes.
    pub unit_commands: Vec<String>,
}

impl Default for ParserConfig {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect();
        ParserConfig {
            opaque_environments: s(&[
                "verbatim",
                "verbatim*",
                "Verbatim",
                "lstlisting",
                "minted",
                "tikzpicture",
                "comment",
                "tabular",
                "tabular*",
                "array",
            ]),
            equation_environments: s(&[
                "equation",
                "equation*",
                "align",
                "align*",
                "alignat",
                "alignat*",
                "gather",
                "gather*",
                "multline",
                "multline*",
                "eqnarray",
                "eqnarray*",
                "displaymath",
                "flalign",
                "flalign*",
                "math",
            ]),
            heading_commands: vec![
                ("section".into(), 1),
                ("subsection".into(), 2),
                ("subsubsection".into(), 3),
                ("paragraph".into(), 4),
                ("subparagraph".into(), 5),
            ],
            span_commands: s(&["emph", "textbf", "textit", "textsc", "underline"]),
            unit_commands: s(&["caption", "title", "footnote"]),
        }
    }
}

impl ParserConfig {
    pub fn is_opaque_env(&self, name: &str) -> bool {
        self.opaque_environments.iter().any(|e| e == name)
    }

    pub fn is_equation_env(&self, name: &str) -> bool {
        self.equation_environments.iter().any(|e| e == name)
    }

    pub fn heading_level(&self, command: &str) -> Option<u8> {
        self.heading_commands
            .iter()
            .find(|(c, _)| c == command)
            .map(|&(_, l)| l)
    }

    pub fn is_span_command(&self, name: &str) -> bool {
        self.span_commands.iter().any(|c| c == name)
    }

    pub fn is_unit_command(&self, name: &str) -> bool {
        self.unit_commands.iter().any(|c| c == name)
    }

    /// True when the command's brace argument should be parsed as inlines.
    pub fn is_translatable_command(&self, name: &str) -> bool {
        self.is_span_command(name) || self.is_unit_command(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_spec_lists() {
        let cfg = ParserConfig::default();
        assert!(cfg.is_opaque_env("verbatim"));
        assert!(cfg.is_opaque_env("lstlisting"));
        assert!(cfg.is_opaque_env("tikzpicture"));
        assert!(cfg.is_equation_env("equation"));
        assert_eq!(cfg.heading_level("section"), Some(1));
        assert_eq!(cfg.heading_level("chapter"), None);
        assert!(cfg.is_span_command("emph"));
        assert!(cfg.is_unit_command("caption"));
    }

    #[test]
    fn config_is_serde_editable() {
        let cfg = ParserConfig::default();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: ParserConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.opaque_environments, cfg.opaque_environments);
        // partial configs fall back to defaults
        let partial: ParserConfig =
            serde_json::from_str(r#"{"span_commands":["emph"]}"#).unwrap();
        assert_eq!(partial.span_commands, vec!["emph".to_string()]);
        assert!(partial.is_opaque_env("verbatim"));
    }
}
