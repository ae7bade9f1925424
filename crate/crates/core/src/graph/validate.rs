use std::collections::HashSet;
use std::fmt;

use super::{HeteroGraph, SparseAdjacency};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FindingKind {
    BadName,
    DuplicateName,
    UnknownNodeType,
    ShapeMismatch,
    BadOffsets,
    UnsortedColumns,
    DuplicateEdge,
    DanglingEndpoint,
    NonFiniteValue,
    MissingTargetFeatures,
    ClassOutOfRange,
    SplitOnUnlabeled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Finding {
    pub severity: Severity,
    pub kind: FindingKind,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} [{:?}] {}: {}", self.kind, self.location, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    /// No error-severity findings.
    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Warning)
    }

    pub fn count(&self, kind: FindingKind) -> usize {
        self.findings.iter().filter(|f| f.kind == kind).count()
    }

    pub(crate) fn push(
        &mut self,
        severity: Severity,
        kind: FindingKind,
        location: impl Into<String>,
        message: impl Into<String>,
    ) {
        self.findings.push(Finding {
            severity,
            kind,
            location: location.into(),
            message: message.into(),
        });
    }

    fn error(&mut self, kind: FindingKind, location: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Error, kind, location, message);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            writeln!(f, "  {finding}")?;
        }
        Ok(())
    }
}

/// Node type names appear in metapath strings, so they exclude `-`, `>`
/// and `<`.
pub(crate) fn valid_node_type_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Edge type names become file names.
pub(crate) fn valid_edge_type_name(s: &str) -> bool {
    !s.is_empty()
        && s != "."
        && s != ".."
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

const MAX_NON_FINITE_REPORTS: usize = 8;

/// Check every structural invariant of `g`. Never mutates the graph.
pub fn validate(g: &HeteroGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n_types = g.node_types.len();

    let mut seen = HashSet::new();
    for t in &g.node_types {
        if !valid_node_type_name(&t.name) {
            report.error(
                FindingKind::BadName,
                format!("node type `{}`", t.name),
                "names may contain only ASCII letters, digits and `_`",
            );
        }
        if !seen.insert(t.name.as_str()) {
            report.error(FindingKind::DuplicateName, format!("node type `{}`", t.name), "declared twice");
        }
    }

    if g.adjacency.len() != g.edge_types.len() {
        report.error(
            FindingKind::ShapeMismatch,
            "edge types",
            format!(
                "{} edge types but {} adjacency matrices",
                g.edge_types.len(),
                g.adjacency.len()
            ),
        );
    }
    let mut seen = HashSet::new();
    for (e, adj) in g.edge_types.iter().zip(&g.adjacency) {
        let loc = format!("edge type `{}`", e.name);
        if !valid_edge_type_name(&e.name) {
            report.error(
                FindingKind::BadName,
                &loc,
                "names may contain only ASCII letters, digits, `_`, `-` and `.`",
            );
        }
        if !seen.insert(e.name.as_str()) {
            report.error(FindingKind::DuplicateName, &loc, "declared twice");
        }
        if e.src.index() >= n_types || e.dst.index() >= n_types {
            report.error(
                FindingKind::UnknownNodeType,
                &loc,
                format!("references node type ids ({}, {}) of {n_types}", e.src.0, e.dst.0),
            );
            continue;
        }
        let (rows, cols) = (g.node_types[e.src.index()].count, g.node_types[e.dst.index()].count);
        check_adjacency(&mut report, &loc, adj, rows, cols);
    }

    if g.features.len() != n_types {
        report.error(
            FindingKind::ShapeMismatch,
            "features",
            format!("{} feature slots for {n_types} node types", g.features.len()),
        );
    }
    for (t, fm) in g.node_types.iter().zip(&g.features) {
        let Some(fm) = fm else { continue };
        let loc = format!("features of `{}`", t.name);
        if fm.rows() != t.count {
            report.error(
                FindingKind::ShapeMismatch,
                &loc,
                format!("{} rows for {} nodes", fm.rows(), t.count),
            );
        }
        let mut reported = 0;
        for (k, x) in fm.data().iter().enumerate() {
            if x.is_finite() {
                continue;
            }
            if reported < MAX_NON_FINITE_REPORTS {
                let cols = fm.cols().max(1);
                report.error(
                    FindingKind::NonFiniteValue,
                    &loc,
                    format!("value {x} at row {}, col {}", k / cols, k % cols),
                );
            }
            reported += 1;
        }
        if reported > MAX_NON_FINITE_REPORTS {
            report.error(
                FindingKind::NonFiniteValue,
                &loc,
                format!("{} further non-finite values", reported - MAX_NON_FINITE_REPORTS),
            );
        }
    }

    if g.target.index() >= n_types {
        report.error(
            FindingKind::UnknownNodeType,
            "target",
            format!("target type id {} of {n_types}", g.target.0),
        );
        return report;
    }
    let target = &g.node_types[g.target.index()];
    if g.features(g.target).is_none() {
        report.error(
            FindingKind::MissingTargetFeatures,
            format!("target `{}`", target.name),
            "target type has no feature matrix",
        );
    }
    let labels = &g.labels;
    if labels.class_of.len() != target.count || labels.split_of.len() != target.count {
        report.error(
            FindingKind::ShapeMismatch,
            "labels",
            format!(
                "{} labels and {} split entries for {} target nodes",
                labels.class_of.len(),
                labels.split_of.len(),
                target.count
            ),
        );
    }
    for (v, c) in labels.class_of.iter().enumerate() {
        if let Some(c) = c {
            if *c as usize >= labels.num_classes {
                report.error(
                    FindingKind::ClassOutOfRange,
                    format!("label of node {v}"),
                    format!("class {c} but only {} classes", labels.num_classes),
                );
            }
        }
    }
    let unlabeled_in_split = labels
        .split_of
        .iter()
        .zip(&labels.class_of)
        .filter(|(s, c)| s.is_some() && c.is_none())
        .count();
    if unlabeled_in_split > 0 {
        report.push(
            Severity::Warning,
            FindingKind::SplitOnUnlabeled,
            "splits",
            format!("{unlabeled_in_split} nodes assigned to a split have no label and are ignored"),
        );
    }
    report
}

fn check_adjacency(
    report: &mut ValidationReport,
    loc: &str,
    adj: &SparseAdjacency,
    rows: usize,
    cols: usize,
) {
    if adj.rows() != rows || adj.cols() != cols {
        report.error(
            FindingKind::ShapeMismatch,
            loc,
            format!("matrix is {}x{}, node counts give {rows}x{cols}", adj.rows(), adj.cols()),
        );
    }
    let offsets = adj.offsets();
    let nnz = adj.indices().len();
    if offsets.len() != adj.rows() + 1
        || offsets.first() != Some(&0)
        || offsets.last() != Some(&nnz)
        || offsets.windows(2).any(|w| w[0] > w[1])
        || adj.values().len() != nnz
    {
        report.error(
            FindingKind::BadOffsets,
            loc,
            format!(
                "{} offsets for {} rows, {} indices, {} values",
                offsets.len(),
                adj.rows(),
                nnz,
                adj.values().len()
            ),
        );
        return;
    }
    let mut dangling = 0;
    for r in 0..adj.rows() {
        let (idx, vals) = adj.row(r);
        for w in idx.windows(2) {
            if w[0] == w[1] {
                report.push(
                    Severity::Error,
                    FindingKind::DuplicateEdge,
                    loc,
                    format!("row {r} stores column {} twice", w[0]),
                );
            } else if w[0] > w[1] {
                report.error(
                    FindingKind::UnsortedColumns,
                    loc,
                    format!("row {r}: column {} before {}", w[0], w[1]),
                );
            }
        }
        for (&c, &v) in idx.iter().zip(vals) {
            if c as usize >= cols {
                if dangling < MAX_NON_FINITE_REPORTS {
                    report.error(
                        FindingKind::DanglingEndpoint,
                        loc,
                        format!("edge ({r}, {c}) but destination type has {cols} nodes"),
                    );
                }
                dangling += 1;
            }
            if !v.is_finite() {
                report.error(
                    FindingKind::NonFiniteValue,
                    loc,
                    format!("value {v} at ({r}, {c})"),
                );
            }
        }
    }
}
