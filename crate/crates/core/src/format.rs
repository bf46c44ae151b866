//! Line-oriented model files.
//!
//! ```text
//! # comment
//! model sphere
//! dim 3
//! basis e1 e2 e3
//! bracket 1 2 = 3:1          # [e1,e2] = e3, indices 1-based, i < j
//! bracket 2 3 = 1:1
//! bracket 1 3 = 2:-1
//! isotropy 1 0 0             # one spanning vector per line
//! complement 0 1 0
//! complement 0 0 1
//! metric 1 0                 # one row per line, full or upper-triangular
//! metric 1
//! ideal zero                 # declares a (possibly empty) named subspace
//! subalgebra whole 1 0 0     # further lines with the same name add rows
//! split m 0 1 0
//! eps_rank 1e-9
//! ```
//!
//! Coefficients accept decimal or rational (`3/2`) literals.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::algebra::{StructureTensor, Subspace};
use crate::catalog::{CatalogEntry, NamedSubspace};
use crate::model::{build_model, BuildOptions, ComplementSource, HomogeneousModel, Invariant, ModelError};
use crate::tolerance::Tolerances;

/// A semantic problem, located at the directive that introduced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub invariant: Option<Invariant>,
    pub residual: Option<f64>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Tolerance overrides applied on top of the file's own settings.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub eps_struct: Option<f64>,
    pub eps_rank: Option<f64>,
    pub eps_len: Option<f64>,
    /// Keep soft violations as warnings instead of rejecting.
    pub force: bool,
}

/// A parsed model together with its named subspaces.
#[derive(Debug, Clone)]
pub struct ModelDocument {
    pub model: HomogeneousModel,
    pub basis_names: Vec<String>,
    pub ideals: Vec<NamedSubspace>,
    pub subalgebras: Vec<NamedSubspace>,
    pub splits: Vec<NamedSubspace>,
}

impl ModelDocument {
    pub fn from_entry(entry: &CatalogEntry) -> Self {
        Self {
            model: entry.model.clone(),
            basis_names: entry.basis_names.clone(),
            ideals: entry.expected.ideals.iter().map(|i| i.ideal.clone()).collect(),
            subalgebras: entry.k_candidates.clone(),
            splits: entry.splits.clone(),
        }
    }

    pub fn ideal(&self, name: &str) -> Option<&NamedSubspace> {
        self.ideals.iter().find(|s| s.name == name)
    }

    pub fn subalgebra(&self, name: &str) -> Option<&NamedSubspace> {
        self.subalgebras.iter().find(|s| s.name == name)
    }

    pub fn split(&self, name: &str) -> Option<&NamedSubspace> {
        self.splits.iter().find(|s| s.name == name)
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (idx, ch) in body.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token { text: &body[s..idx], column: body[..s].chars().count() + 1 });
                start = None;
            }
            (false, None) => start = Some(idx),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &body[s..], column: body[..s].chars().count() + 1 });
    }
    out
}

/// Parses `x`, `-x.y`, `1e-3` or `a/b`.
pub fn parse_scalar(s: &str) -> Option<f64> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.parse().ok()?, b.parse().ok()?);
            if b == 0.0 {
                return None;
            }
            a / b
        }
        None => s.parse().ok()?,
    };
    v.is_finite().then_some(v)
}

/// Shortest representation that parses back to the same value.
pub fn format_scalar(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, column, message: message.into() }
}

#[derive(Default)]
struct Rows {
    line: usize,
    rows: Vec<(usize, usize, Vec<f64>)>,
}

/// `(i, j) -> (line, [(k, c)])`, 1-based.
type BracketRecords = BTreeMap<(usize, usize), (usize, Vec<(usize, f64)>)>;

#[derive(Default)]
struct Raw {
    name: Option<String>,
    dim: Option<(usize, usize)>,
    basis: Option<(usize, Vec<String>)>,
    brackets: BracketRecords,
    first_bracket: Option<usize>,
    isotropy: Rows,
    complement: Rows,
    metric: Rows,
    named: Vec<(NamedKind, String, Rows)>,
    eps: [Option<f64>; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NamedKind {
    Ideal,
    Subalgebra,
    Split,
}

fn scalars(line: usize, toks: &[Token]) -> Result<Vec<f64>, FormatError> {
    toks.iter()
        .map(|t| parse_scalar(t.text).ok_or_else(|| syntax(line, t.column, format!("expected a number, found '{}'", t.text))))
        .collect()
}

fn index(line: usize, t: &Token) -> Result<usize, FormatError> {
    match t.text.parse::<usize>() {
        Ok(i) if i >= 1 => Ok(i),
        _ => Err(syntax(line, t.column, format!("expected a 1-based basis index, found '{}'", t.text))),
    }
}

fn read_raw(text: &str) -> Result<Raw, FormatError> {
    let mut raw = Raw::default();
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let toks = tokenize(line);
        let Some(head) = toks.first() else { continue };
        let rest = &toks[1..];
        let need_one = |what: &str| -> Result<&Token, FormatError> {
            match rest {
                [t] => Ok(t),
                _ => Err(syntax(ln, head.column, format!("'{}' takes exactly one {what}", head.text))),
            }
        };
        match head.text {
            "model" => raw.name = Some(need_one("name")?.text.to_string()),
            "dim" => {
                let t = need_one("integer")?;
                match t.text.parse::<usize>() {
                    Ok(n) if n > 0 => raw.dim = Some((n, ln)),
                    _ => return Err(syntax(ln, t.column, "dimension must be a positive integer")),
                }
            }
            "basis" => raw.basis = Some((ln, rest.iter().map(|t| t.text.to_string()).collect())),
            "bracket" => {
                if rest.len() < 4 || rest[2].text != "=" {
                    return Err(syntax(ln, head.column, "expected 'bracket i j = k:c [k:c ...]'"));
                }
                let (i, j) = (index(ln, &rest[0])?, index(ln, &rest[1])?);
                if i >= j {
                    return Err(syntax(ln, rest[1].column, format!("bracket records need i < j, found ({i},{j})")));
                }
                let mut terms: Vec<(usize, f64)> = Vec::new();
                for t in &rest[3..] {
                    let (k, c) = t
                        .text
                        .split_once(':')
                        .ok_or_else(|| syntax(ln, t.column, format!("expected k:coefficient, found '{}'", t.text)))?;
                    let k = index(ln, &Token { text: k, column: t.column })?;
                    let c = parse_scalar(c)
                        .ok_or_else(|| syntax(ln, t.column + k.to_string().len() + 1, format!("bad coefficient '{c}'")))?;
                    if terms.iter().any(|&(kk, _)| kk == k) {
                        return Err(syntax(ln, t.column, format!("component e{k} repeated in one record")));
                    }
                    terms.push((k, c));
                }
                if let Some((prev, _)) = raw.brackets.get(&(i, j)) {
                    return Err(syntax(ln, head.column, format!("duplicate bracket record ({i},{j}), first given on line {prev}")));
                }
                raw.first_bracket.get_or_insert(ln);
                raw.brackets.insert((i, j), (ln, terms));
            }
            "isotropy" | "complement" | "metric" => {
                if rest.is_empty() {
                    return Err(syntax(ln, head.column, format!("'{}' needs coordinates", head.text)));
                }
                let v = scalars(ln, rest)?;
                let rows = match head.text {
                    "isotropy" => &mut raw.isotropy,
                    "complement" => &mut raw.complement,
                    _ => &mut raw.metric,
                };
                if rows.rows.is_empty() {
                    rows.line = ln;
                }
                rows.rows.push((ln, rest[0].column, v));
            }
            "ideal" | "subalgebra" | "split" => {
                let kind = match head.text {
                    "ideal" => NamedKind::Ideal,
                    "subalgebra" => NamedKind::Subalgebra,
                    _ => NamedKind::Split,
                };
                let Some((name, coords)) = rest.split_first() else {
                    return Err(syntax(ln, head.column, format!("'{}' needs a name", head.text)));
                };
                let v = scalars(ln, coords)?;
                let slot = match raw.named.iter_mut().find(|(k, n, _)| *k == kind && n == name.text) {
                    Some(slot) => slot,
                    None => {
                        raw.named.push((kind, name.text.to_string(), Rows { line: ln, rows: Vec::new() }));
                        raw.named.last_mut().expect("just pushed")
                    }
                };
                if !v.is_empty() {
                    slot.2.rows.push((ln, name.column, v));
                }
            }
            "eps_struct" | "eps_rank" | "eps_len" => {
                let t = need_one("value")?;
                let v = parse_scalar(t.text)
                    .filter(|v| *v > 0.0)
                    .ok_or_else(|| syntax(ln, t.column, "tolerance must be a positive number"))?;
                let slot = ["eps_struct", "eps_rank", "eps_len"].iter().position(|s| *s == head.text).expect("matched");
                raw.eps[slot] = Some(v);
            }
            other => return Err(syntax(ln, head.column, format!("unknown directive '{other}'"))),
        }
    }
    Ok(raw)
}

fn subspace(label: &str, n: usize, rows: &Rows, eps_rank: f64) -> Result<Subspace, FormatError> {
    for (ln, col, v) in &rows.rows {
        if v.len() != n {
            return Err(syntax(*ln, *col, format!("'{label}' vector has {} entries, dimension is {n}", v.len())));
        }
    }
    let vs: Vec<Vec<f64>> = rows.rows.iter().map(|r| r.2.clone()).collect();
    Subspace::from_rows(label, n, &vs, eps_rank).map_err(|e| {
        FormatError::Invalid(vec![Diagnostic { line: Some(rows.line), invariant: None, residual: None, message: e.to_string() }])
    })
}

fn metric_matrix(rows: &Rows, r: usize) -> Result<DMatrix<f64>, FormatError> {
    if rows.rows.len() != r {
        let line = if rows.rows.is_empty() { 1 } else { rows.line };
        return Err(syntax(line, 1, format!("metric needs {r} rows for a {r}-dimensional complement, found {}", rows.rows.len())));
    }
    let full = rows.rows.iter().all(|row| row.2.len() == r);
    let upper = rows.rows.iter().enumerate().all(|(i, row)| row.2.len() == r - i);
    let mut g = DMatrix::zeros(r, r);
    for (i, (ln, col, v)) in rows.rows.iter().enumerate() {
        if full {
            for (j, x) in v.iter().enumerate() {
                g[(i, j)] = *x;
            }
        } else if upper {
            for (off, x) in v.iter().enumerate() {
                g[(i, i + off)] = *x;
                g[(i + off, i)] = *x;
            }
        } else {
            return Err(syntax(*ln, *col, format!("metric row {} must have {r} entries (full) or {} (upper-triangular)", i + 1, r - i)));
        }
    }
    Ok(g)
}

fn locate(raw: &Raw, inv: Invariant) -> Option<usize> {
    match inv {
        Invariant::StructureAxioms => raw.first_bracket,
        Invariant::IsotropySubalgebra | Invariant::Reductive => Some(raw.isotropy.line).filter(|l| *l > 0),
        Invariant::MetricSymmetric | Invariant::MetricPositiveDefinite | Invariant::MetricInvariant => {
            Some(raw.metric.line).filter(|l| *l > 0)
        }
    }
}

fn model_diagnostics(raw: &Raw, algebra: &StructureTensor, eps_struct: f64, err: ModelError) -> Vec<Diagnostic> {
    match err {
        ModelError::Invalid(vs) => {
            let mut out = Vec::new();
            for v in vs {
                if v.invariant == Invariant::StructureAxioms {
                    // Report the two axioms separately.
                    let s = algebra.validate_structure(eps_struct);
                    for (what, res) in [("antisymmetry", s.antisymmetry_residual), ("Jacobi identity", s.jacobi_residual)] {
                        if res > eps_struct {
                            out.push(Diagnostic {
                                line: raw.first_bracket,
                                invariant: Some(v.invariant),
                                residual: Some(res),
                                message: format!("{what} violated: residual {res} > {eps_struct:e}"),
                            });
                        }
                    }
                } else {
                    out.push(Diagnostic {
                        line: locate(raw, v.invariant),
                        invariant: Some(v.invariant),
                        residual: Some(v.residual),
                        message: v.to_string(),
                    });
                }
            }
            out
        }
        ModelError::MetricShape { .. } => vec![Diagnostic {
            line: Some(raw.metric.line).filter(|l| *l > 0),
            invariant: None,
            residual: None,
            message: err.to_string(),
        }],
        ModelError::NotComplementary { .. } | ModelError::ComplementRequired => vec![Diagnostic {
            line: Some(raw.complement.line).filter(|l| *l > 0).or(Some(raw.isotropy.line).filter(|l| *l > 0)),
            invariant: None,
            residual: None,
            message: err.to_string(),
        }],
        other => vec![Diagnostic { line: None, invariant: None, residual: None, message: other.to_string() }],
    }
}

/// Parses and validates a model file.
pub fn parse_document(text: &str, opts: &LoadOptions) -> Result<ModelDocument, FormatError> {
    let raw = read_raw(text)?;
    let Some((n, _)) = raw.dim else {
        return Err(syntax(1, 1, "missing 'dim' directive"));
    };
    let defaults = Tolerances::default();
    let tol = Tolerances {
        eps_struct: opts.eps_struct.or(raw.eps[0]).unwrap_or(defaults.eps_struct),
        eps_rank: opts.eps_rank.or(raw.eps[1]).unwrap_or(defaults.eps_rank),
        eps_len: opts.eps_len.or(raw.eps[2]).unwrap_or(defaults.eps_len),
    };

    let basis_names = match &raw.basis {
        Some((ln, names)) => {
            if names.len() != n {
                return Err(syntax(*ln, 1, format!("basis lists {} names, dimension is {n}", names.len())));
            }
            names.clone()
        }
        None => (1..=n).map(|i| format!("e{i}")).collect(),
    };

    let mut records = Vec::new();
    for (&(i, j), (ln, terms)) in &raw.brackets {
        for &(k, c) in terms {
            if i > n || j > n || k > n {
                return Err(syntax(*ln, 1, format!("basis index out of range for dimension {n}")));
            }
            records.push((i - 1, j - 1, k - 1, c));
        }
    }
    let algebra = StructureTensor::from_brackets(n, &records).map_err(|e| syntax(raw.first_bracket.unwrap_or(1), 1, e.to_string()))?;

    let isotropy = subspace("h", n, &raw.isotropy, tol.eps_rank)?;
    let complement = if raw.complement.rows.is_empty() {
        None
    } else {
        Some(subspace("m", n, &raw.complement, tol.eps_rank)?)
    };
    let r = match &complement {
        Some(c) => c.dim(),
        None => n - isotropy.dim(),
    };
    let metric = metric_matrix(&raw.metric, r)?;

    let build = BuildOptions { tol, strict: !opts.force };
    let name = raw.name.clone().unwrap_or_else(|| "unnamed".into());
    let model = build_model(name, algebra.clone(), isotropy, metric, complement, &build)
        .map_err(|e| FormatError::Invalid(model_diagnostics(&raw, &algebra, tol.eps_struct, e)))?;

    let mut doc = ModelDocument { model, basis_names, ideals: Vec::new(), subalgebras: Vec::new(), splits: Vec::new() };
    for (kind, name, rows) in &raw.named {
        let s = NamedSubspace { name: name.clone(), subspace: subspace(name, n, rows, tol.eps_rank)? };
        match kind {
            NamedKind::Ideal => doc.ideals.push(s),
            NamedKind::Subalgebra => doc.subalgebras.push(s),
            NamedKind::Split => doc.splits.push(s),
        }
    }
    Ok(doc)
}

pub fn parse_model(text: &str) -> Result<HomogeneousModel, FormatError> {
    parse_document(text, &LoadOptions::default()).map(|d| d.model)
}

pub fn load_document(path: &Path, opts: &LoadOptions) -> Result<ModelDocument, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
    parse_document(&text, opts)
}

fn row(xs: impl IntoIterator<Item = f64>) -> String {
    xs.into_iter().map(format_scalar).collect::<Vec<_>>().join(" ")
}

/// Serializes a document; `parse_document(emit_document(d))` reproduces `d`.
pub fn emit_document(doc: &ModelDocument) -> String {
    use std::fmt::Write;
    let m = &doc.model;
    let n = m.dim();
    let mut s = String::new();
    let _ = writeln!(s, "model {}", m.name());
    let _ = writeln!(s, "dim {n}");
    let _ = writeln!(s, "basis {}", doc.basis_names.join(" "));

    let mut grouped: BTreeMap<(usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for (i, j, k, c) in m.algebra().records() {
        grouped.entry((i, j)).or_default().push((k, c));
    }
    for ((i, j), terms) in grouped {
        let rhs: Vec<String> = terms.iter().map(|(k, c)| format!("{}:{}", k + 1, format_scalar(*c))).collect();
        let _ = writeln!(s, "bracket {} {} = {}", i + 1, j + 1, rhs.join(" "));
    }
    for v in m.isotropy().spanning_vectors() {
        let _ = writeln!(s, "isotropy {}", row(v.iter().copied()));
    }
    if m.validation().complement_source == ComplementSource::User {
        for v in m.complement().spanning_vectors() {
            let _ = writeln!(s, "complement {}", row(v.iter().copied()));
        }
    }
    let g = m.metric();
    for i in 0..g.nrows() {
        let _ = writeln!(s, "metric {}", row(g.row(i).iter().copied()));
    }
    for (kw, list) in [("ideal", &doc.ideals), ("subalgebra", &doc.subalgebras), ("split", &doc.splits)] {
        for ns in list {
            let vs = ns.subspace.spanning_vectors();
            if vs.is_empty() {
                let _ = writeln!(s, "{kw} {}", ns.name);
            }
            for v in vs {
                let _ = writeln!(s, "{kw} {} {}", ns.name, row(v.iter().copied()));
            }
        }
    }
    let (t, d) = (m.tolerances(), Tolerances::default());
    for (key, val, def) in [
        ("eps_struct", t.eps_struct, d.eps_struct),
        ("eps_rank", t.eps_rank, d.eps_rank),
        ("eps_len", t.eps_len, d.eps_len),
    ] {
        if val != def {
            let _ = writeln!(s, "{key} {}", format_scalar(val));
        }
    }
    s
}

pub fn emit_entry(entry: &CatalogEntry) -> String {
    emit_document(&ModelDocument::from_entry(entry))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn rationals() {
        assert_eq!(parse_scalar("3/2"), Some(1.5));
        assert_eq!(parse_scalar("-1/4"), Some(-0.25));
        assert_eq!(parse_scalar("1/0"), None);
        assert_eq!(parse_scalar("abc"), None);
        assert_eq!(format_scalar(-0.0), "0");
    }

    #[test]
    fn sphere_round_trip() {
        let entry = catalog::sphere();
        let text = emit_entry(&entry);
        let doc = parse_document(&text, &LoadOptions::default()).unwrap();
        assert_eq!(doc.model.algebra(), entry.model.algebra());
        assert_eq!(doc.model.metric(), entry.model.metric());
        assert_eq!(doc.model.isotropy().span(), entry.model.isotropy().span());
        assert_eq!(doc.model.complement().span(), entry.model.complement().span());
        assert_eq!(emit_document(&doc), text);
    }

    #[test]
    fn duplicate_bracket_is_rejected() {
        let text = "dim 3\nbracket 1 2 = 3:1\nbracket 1 2 = 3:2\nmetric 1 0 0\nmetric 0 1 0\nmetric 0 0 1\n";
        match parse_document(text, &LoadOptions::default()) {
            Err(FormatError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_columns() {
        let text = "dim 2\nmetric 1 x\n";
        match parse_document(text, &LoadOptions::default()) {
            Err(FormatError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 10)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jacobi_failure_is_reported() {
        // cyclic sum over (e1,e2,e3) equals e3
        let text = "dim 3\nbracket 1 2 = 3:1\nbracket 2 3 = 2:1\nmetric 1 0 0\nmetric 1 0\nmetric 1\n";
        let Err(FormatError::Invalid(ds)) = parse_document(text, &LoadOptions::default()) else { panic!() };
        assert!(ds.iter().any(|d| d.message.contains("Jacobi") && d.line == Some(2)));
    }

    #[test]
    fn negative_eigenvalue_is_named() {
        let text = "dim 2\nmetric 1 0\nmetric 0 -1\n";
        let Err(FormatError::Invalid(ds)) = parse_document(text, &LoadOptions::default()) else { panic!() };
        assert!(ds[0].message.contains("minimum eigenvalue -1"), "{}", ds[0]);
    }

    #[test]
    fn upper_triangular_metric() {
        let text = "dim 2\nmetric 2 1\nmetric 3\n";
        let m = parse_model(text).unwrap();
        assert_eq!(m.metric(), &DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]));
    }
}
