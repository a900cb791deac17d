//! Graphviz DOT rendering of a results document.
//!
//! Nodes are grouped and filled by tier; each edge takes the color of
//! its source node's tier, so across-tier influences are visible at a
//! glance in the rendered graph.

use crate::formats::ResultsDoc;

/// Qualitative palette, one entry per tier (cycling past eight tiers).
const PALETTE: [&str; 8] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5",
];

fn tier_color(tier: usize) -> &'static str {
    PALETTE[(tier - 1) % PALETTE.len()]
}

fn quoted(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn render_dot(doc: &ResultsDoc) -> String {
    let tier_of = |name: &str| doc.provenance.tiers.get(name).copied().unwrap_or(1);
    let mut out = String::new();
    out.push_str("digraph discovered {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=box, style=filled];\n");
    for name in &doc.columns {
        let tier = tier_of(name);
        out.push_str(&format!(
            "  {} [fillcolor=\"{}\", tier={tier}];\n",
            quoted(name),
            tier_color(tier)
        ));
    }
    // Same-tier nodes share a rank so stations line up vertically.
    let mut tiers: Vec<usize> = doc.columns.iter().map(|n| tier_of(n)).collect();
    tiers.sort_unstable();
    tiers.dedup();
    for tier in tiers {
        let members: Vec<String> = doc
            .columns
            .iter()
            .filter(|n| tier_of(n) == tier)
            .map(|n| quoted(n))
            .collect();
        out.push_str(&format!("  {{ rank=same; {}; }}\n", members.join("; ")));
    }
    for edge in &doc.edges {
        out.push_str(&format!(
            "  {} -> {} [color=\"{}\"];\n",
            quoted(&edge.source),
            quoted(&edge.target),
            tier_color(tier_of(&edge.source))
        ));
    }
    out.push_str("}\n");
    out
}
