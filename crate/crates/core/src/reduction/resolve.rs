use serde::Serialize;

use super::{blow_up_point, jacobian_classify, BlowUpChart, PlanarField, SingularityClass, SingularityReport};
use crate::error::Result;
use crate::poly::Rational;

pub const DEFAULT_MAX_DEPTH: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct ResolutionNode {
    /// `root`, then `/<singularity index>.<chart>` per blow-up.
    pub path: String,
    pub depth: usize,
    pub chart: Option<BlowUpChart>,
    pub field: PlanarField,
    pub singularities: Vec<SingularityReport>,
    pub children: Vec<ResolutionNode>,
    /// A non-elementary point was left alone because the depth cap was hit.
    pub capped: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LeafSummary {
    pub path: String,
    pub depth: usize,
    pub classes: Vec<SingularityClass>,
    pub elementary: bool,
    /// Every singular point on this leaf is a saddle (vacuous when there are none).
    pub all_saddles: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolutionTree {
    /// Exponents of the monomial factor `x^α y^β` removed at the root.
    pub alpha: u32,
    pub beta: u32,
    pub root: ResolutionNode,
    pub max_depth: usize,
    pub depth: usize,
    pub cap_hit: bool,
    pub irrational_points: usize,
    pub leaves: Vec<LeafSummary>,
}

impl ResolutionTree {
    pub fn all_leaves_elementary(&self) -> bool {
        self.leaves.iter().all(|l| l.elementary)
    }
}

fn expand(node: &mut ResolutionNode, max_depth: usize) -> Result<()> {
    for (i, s) in node.singularities.clone().iter().enumerate() {
        if s.class != SingularityClass::NonElementary {
            continue;
        }
        if node.depth >= max_depth {
            node.capped = true;
            continue;
        }
        let (c1, c2) = blow_up_point(&node.field, &s.point2())?;
        for (tag, chart) in [("c1", c1), ("c2", c2)] {
            let mut child = ResolutionNode {
                path: format!("{}/{}.{}", node.path, i, tag),
                depth: node.depth + 1,
                field: chart.strict.clone(),
                singularities: chart.singularities.clone(),
                chart: Some(chart),
                children: Vec::new(),
                capped: false,
            };
            expand(&mut child, max_depth)?;
            node.children.push(child);
        }
    }
    Ok(())
}

fn collect(node: &ResolutionNode, leaves: &mut Vec<LeafSummary>, stats: &mut (usize, bool, usize)) {
    stats.0 = stats.0.max(node.depth);
    stats.1 |= node.capped;
    if let Some(c) = &node.chart {
        stats.2 += c.irrational_points;
    }
    if node.children.is_empty() {
        let classes: Vec<_> = node.singularities.iter().map(|s| s.class).collect();
        leaves.push(LeafSummary {
            path: node.path.clone(),
            depth: node.depth,
            elementary: classes.iter().all(|c| c.is_elementary()),
            all_saddles: classes.iter().all(|c| *c == SingularityClass::Saddle),
            classes,
        });
    }
    for c in &node.children {
        collect(c, leaves, stats);
    }
}

/// Remove the monomial factor of `z`, then blow up non-elementary singular
/// points recursively. Root singular points are looked for among `candidates`,
/// the origin and rational points on the axes.
pub fn resolve(z: &PlanarField, candidates: &[[Rational; 2]], max_depth: usize) -> Result<ResolutionTree> {
    let (alpha, beta) = z.monomial_factor();
    let field = z.remove_monomial(alpha, beta);
    let mut points = field.axis_singularities();
    points.extend(candidates.iter().filter(|p| field.vanishes_at(p)).cloned());
    points.sort();
    points.dedup();
    let singularities = points.iter().map(|p| jacobian_classify(&field, p)).collect();
    let mut root = ResolutionNode {
        path: "root".into(),
        depth: 0,
        chart: None,
        field,
        singularities,
        children: Vec::new(),
        capped: false,
    };
    expand(&mut root, max_depth)?;
    let mut leaves = Vec::new();
    let mut stats = (0, false, 0);
    collect(&root, &mut leaves, &mut stats);
    Ok(ResolutionTree {
        alpha,
        beta,
        root,
        max_depth,
        depth: stats.0,
        cap_hit: stats.1,
        irrational_points: stats.2,
        leaves,
    })
}
