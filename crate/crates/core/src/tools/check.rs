//! Compiler diagnostics in the usual `file:line:col: severity: message` form.

use crate::program::{compile, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl Diagnostic {
    pub fn render(&self, file: &str) -> String {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        format!("{file}:{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

/// Compiles `source` and collects its diagnostics. The program is returned
/// when there are no errors; warnings never block compilation.
pub fn check(source: &str) -> (Option<Program>, Vec<Diagnostic>) {
    match compile(source) {
        Ok(p) => {
            let diags = p
                .warnings
                .iter()
                .map(|w| Diagnostic {
                    severity: Severity::Warning,
                    line: w.pos.line,
                    column: w.pos.column,
                    message: w.message.clone(),
                })
                .collect();
            (Some(p), diags)
        }
        Err(e) => {
            let pos = e.position();
            let d = Diagnostic {
                severity: Severity::Error,
                line: pos.line,
                column: pos.column,
                message: e.message(),
            };
            (None, vec![d])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_has_position() {
        let (p, d) = check("fun f() -> Int:\n  return nope\n");
        assert!(p.is_none());
        assert_eq!(d.len(), 1);
        let line = d[0].render("x.rb1");
        assert!(line.starts_with("x.rb1:2:"), "{line}");
        assert!(line.contains(": error: "), "{line}");
    }

    #[test]
    fn clean_source_has_no_diagnostics() {
        let (p, d) = check("fun f() -> Int:\n  return 1\n");
        assert!(p.is_some());
        assert!(d.is_empty());
    }
}
