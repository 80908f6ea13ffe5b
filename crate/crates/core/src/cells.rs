//! Kazhdan–Lusztig cells inside a ball, and the strip partition predicted
//! by the cell tables.
//!
//! The left preorder is generated by `z <=_L y` whenever `C_z` appears in
//! `C_s C_y`. Inside a ball only edges out of elements of length at most
//! `R - 1` are known, and a path between two elements may have to leave
//! the ball, so the computed cells are only trusted on a certified
//! interior `l(w) <= R - margin`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;
use serde_json::{json, Value};

use crate::ball::{Ball, Id};
use crate::celldata::{enumerate_cell, finite_part, OrderStep, ZoneTable};
use crate::coxeter::{GenSet, GroupElement, Side, GENS};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::klbasis::KLCache;

/// Left edges `y -> z` (`C_z` occurs in some `C_s C_y`, `s y > y`).
pub struct CellGraph {
    ball: Arc<Ball>,
    left: Vec<Vec<Id>>,
}

impl CellGraph {
    pub fn build(kl: &KLCache, exec: Exec) -> Result<Self> {
        let ball = kl.ball().clone();
        let ids: Vec<Id> = match ball.radius() {
            0 => Vec::new(),
            r => ball.up_to(r - 1).collect(),
        };
        let rows = exec.map(&ids, |&y| -> Result<Vec<Id>> {
            let mut out = BTreeSet::new();
            for s in GENS {
                if ball.is_left_descent(y, s) {
                    continue;
                }
                out.extend(kl.c_gen_mult(s, y, Side::Left)?.support());
            }
            out.remove(&y);
            Ok(out.into_iter().collect())
        });
        let mut left = vec![Vec::new(); ball.size()];
        for (y, row) in ids.iter().zip(rows) {
            left[y.index()] = row?;
        }
        Ok(Self { ball, left })
    }

    pub fn ball(&self) -> &Arc<Ball> {
        &self.ball
    }

    pub fn left_edges(&self, y: Id) -> &[Id] {
        &self.left[y.index()]
    }

    /// Right edges are left edges conjugated by inversion.
    pub fn right_edges(&self, y: Id) -> Vec<Id> {
        let b = &self.ball;
        self.left[b.inverse(y).index()].iter().map(|&z| b.inverse(z)).collect()
    }

    fn graph(&self, left: bool, right: bool) -> DiGraph<(), ()> {
        let n = self.ball.size();
        let mut g = DiGraph::with_capacity(n, 0);
        for _ in 0..n {
            g.add_node(());
        }
        for y in self.ball.ids() {
            if left {
                for z in self.left_edges(y) {
                    g.add_edge(NodeIndex::new(y.index()), NodeIndex::new(z.index()), ());
                }
            }
            if right {
                for z in self.right_edges(y) {
                    g.add_edge(NodeIndex::new(y.index()), NodeIndex::new(z.index()), ());
                }
            }
        }
        g
    }

    pub fn left_cells(&self) -> Partition {
        Partition::from_sccs(self.ball.size(), tarjan_scc(&self.graph(true, false)))
    }

    pub fn right_cells(&self) -> Partition {
        Partition::from_sccs(self.ball.size(), tarjan_scc(&self.graph(false, true)))
    }

    pub fn two_sided_cells(&self) -> Partition {
        Partition::from_sccs(self.ball.size(), tarjan_scc(&self.graph(true, true)))
    }

    /// Everything reachable from `y` along left edges, `y` included: the
    /// elements known to satisfy `x <=_L y`.
    pub fn left_below(&self, y: Id) -> Vec<bool> {
        let mut seen = vec![false; self.ball.size()];
        let mut stack = vec![y];
        seen[y.index()] = true;
        while let Some(u) = stack.pop() {
            for &z in self.left_edges(u) {
                if !seen[z.index()] {
                    seen[z.index()] = true;
                    stack.push(z);
                }
            }
        }
        seen
    }
}

/// A partition of the ball into blocks, numbered by their smallest element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<Vec<Id>>,
}

impl Partition {
    fn from_sccs(n: usize, sccs: Vec<Vec<NodeIndex>>) -> Self {
        let blocks = sccs.into_iter().map(|c| c.into_iter().map(|v| Id(v.index() as u32)).collect());
        Self::from_blocks(n, blocks)
    }

    /// Builds a partition from blocks covering `0..n` exactly once.
    pub fn from_blocks(n: usize, blocks: impl IntoIterator<Item = Vec<Id>>) -> Self {
        let mut blocks: Vec<Vec<Id>> = blocks
            .into_iter()
            .filter(|b| !b.is_empty())
            .map(|mut b| {
                b.sort();
                b
            })
            .collect();
        blocks.sort();
        let mut block_of = vec![usize::MAX; n];
        for (i, b) in blocks.iter().enumerate() {
            for w in b {
                assert_eq!(block_of[w.index()], usize::MAX, "element in two blocks");
                block_of[w.index()] = i;
            }
        }
        assert!(block_of.iter().all(|&b| b != usize::MAX), "blocks do not cover");
        Self { block_of, blocks }
    }

    pub fn block_of(&self, w: Id) -> usize {
        self.block_of[w.index()]
    }

    pub fn block(&self, i: usize) -> &[Id] {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[Vec<Id>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn same(&self, x: Id, y: Id) -> bool {
        self.block_of(x) == self.block_of(y)
    }

    /// A coarser partition with the blocks of `x` and `y` merged.
    pub fn merged(&self, x: Id, y: Id) -> Partition {
        let (bx, by) = (self.block_of(x), self.block_of(y));
        let mut blocks = self.blocks.clone();
        if bx != by {
            let moved = std::mem::take(&mut blocks[by]);
            blocks[bx].extend(moved);
        }
        Partition::from_blocks(self.block_of.len(), blocks)
    }

    /// Blocks cut down to the elements of length at most `max_len`.
    pub fn restricted(&self, ball: &Ball, max_len: usize) -> Vec<Vec<Id>> {
        self.blocks
            .iter()
            .map(|b| b.iter().copied().filter(|&w| ball.length(w) <= max_len).collect::<Vec<_>>())
            .filter(|b| !b.is_empty())
            .collect()
    }
}

/// Certification margin for a table: one more than the longest `w_Gamma`.
pub fn default_margin(table: &ZoneTable) -> usize {
    1 + table.descriptors.iter().map(|d| d.w_gamma.len()).max().unwrap_or(0)
}

/// Largest certified length of a ball.
pub fn interior(ball: &Ball, margin: usize) -> usize {
    ball.radius().saturating_sub(margin)
}

/// `w = x u y` with `u` in `class` and lengths adding up, for every `w` in
/// the ball, filled in increasing length.
fn has_factor(ball: &Ball, class: &[GroupElement]) -> Vec<bool> {
    let sys = ball.system();
    let words: Vec<Vec<u8>> = class.iter().map(|u| sys.normal_form(u.word()).word().to_vec()).collect();
    let mut out = vec![false; ball.size()];
    for w in ball.ids() {
        let prefix = words.iter().any(|u| {
            u.iter()
                .try_fold(w, |acc, &s| if ball.is_left_descent(acc, s) { ball.lmul(s, acc) } else { None })
                .is_some()
        });
        out[w.index()] = prefix
            || GENS.into_iter().any(|s| ball.is_left_descent(w, s) && out[ball.lmul(s, w).expect("descent").index()]);
    }
    out
}

/// Assignment of every element of the ball to a class index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strips {
    class_of: Vec<usize>,
}

impl Strips {
    /// Each `w` goes to the first class, in the table's processing order,
    /// that occurs as a reduced factor of `w`. The two orders of every
    /// `<->` pair must produce the same strips.
    pub fn build(ball: &Ball, table: &ZoneTable) -> Result<Self> {
        let factors: BTreeMap<usize, Vec<bool>> =
            table.classes.iter().map(|c| (c.index, has_factor(ball, &c.elements))).collect();
        let assign = |order: &[usize]| -> Vec<usize> {
            ball.ids()
                .map(|w| *order.iter().find(|c| factors[c][w.index()]).expect("every w has e as a factor"))
                .collect()
        };
        let order = table.processing_order();
        let class_of = assign(&order);
        for step in &table.order {
            if let OrderStep::Pair(i, j) = *step {
                let swapped: Vec<usize> = order
                    .iter()
                    .map(|&c| match c {
                        c if c == i => j,
                        c if c == j => i,
                        c => c,
                    })
                    .collect();
                let other = assign(&swapped);
                if let Some(w) = ball.ids().find(|w| other[w.index()] != class_of[w.index()]) {
                    return Err(Error::CellData(format!(
                        "classes c{i} and c{j} are not interchangeable: {} changes strip",
                        ball.elem(w)
                    )));
                }
            }
        }
        Ok(Self { class_of })
    }

    pub fn class_of(&self, w: Id) -> usize {
        self.class_of[w.index()]
    }

    pub fn members(&self, class: usize) -> impl Iterator<Item = Id> + '_ {
        self.class_of.iter().enumerate().filter(move |(_, &c)| c == class).map(|(i, _)| Id(i as u32))
    }

    pub fn partition(&self) -> Partition {
        let mut by: BTreeMap<usize, Vec<Id>> = BTreeMap::new();
        for (i, &c) in self.class_of.iter().enumerate() {
            by.entry(c).or_default().push(Id(i as u32));
        }
        Partition::from_blocks(self.class_of.len(), by.into_values())
    }
}

/// A disagreement between computed cells and strips on the interior.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub element: String,
    pub strip: usize,
    /// Interior elements in the computed cell but not in the strip.
    pub only_cell: Vec<String>,
    /// Interior elements in the strip but not in the computed cell.
    pub only_strip: Vec<String>,
}

/// Compares `two_sided` with the strips on elements of length at most
/// `max_len`; returns one mismatch per offending computed cell.
pub fn compare_with_strips(ball: &Ball, two_sided: &Partition, strips: &Strips, max_len: usize) -> Vec<Mismatch> {
    let mut out = Vec::new();
    let mut done = BTreeSet::new();
    for x in ball.up_to(max_len) {
        let b = two_sided.block_of(x);
        if !done.insert(b) {
            continue;
        }
        let cell: BTreeSet<Id> = two_sided.block(b).iter().copied().filter(|&w| ball.length(w) <= max_len).collect();
        let c = strips.class_of(x);
        let strip: BTreeSet<Id> = strips.members(c).filter(|&w| ball.length(w) <= max_len).collect();
        if cell != strip {
            let names = |s: BTreeSet<&Id>| s.into_iter().map(|w| ball.elem(*w).to_string()).collect();
            out.push(Mismatch {
                element: ball.elem(x).to_string(),
                strip: c,
                only_cell: names(cell.difference(&strip).collect()),
                only_strip: names(strip.difference(&cell).collect()),
            });
        }
    }
    out
}

/// Two-sided cells of every proper parabolic subgroup `W_I`, computed with
/// the same weights, are glued along shared elements; the resulting blocks
/// must be exactly the table's classes.
pub fn check_parabolic_classes(kl: &KLCache, table: &ZoneTable) -> Result<()> {
    let ball = kl.ball();
    let sys = ball.system();
    let finite: Vec<GroupElement> = finite_part(sys);
    let pos: HashMap<GroupElement, usize> = finite.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    let mut parent: Vec<usize> = (0..finite.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let gens = GenSet::of(&[GENS[i], GENS[j]]);
        let elems = sys.parabolic_elements(gens)?;
        let ids: Vec<Id> = elems.iter().map(|w| ball.require(w)).collect::<Result<_>>()?;
        let local: HashMap<Id, usize> = ids.iter().enumerate().map(|(k, &w)| (w, k)).collect();
        let mut g: DiGraph<(), ()> = DiGraph::new();
        for _ in &ids {
            g.add_node(());
        }
        for &y in &ids {
            for s in gens.iter() {
                for side in [Side::Left, Side::Right] {
                    let prod = kl.c_gen_mult(s, y, side)?;
                    for z in prod.support() {
                        let k = *local
                            .get(&z)
                            .ok_or_else(|| Error::Construction(format!("C_s C_y left W_{gens} at {}", ball.elem(z))))?;
                        g.add_edge(NodeIndex::new(local[&y]), NodeIndex::new(k), ());
                    }
                }
            }
        }
        for scc in tarjan_scc(&g) {
            let first = pos[&elems[scc[0].index()]];
            for v in &scc[1..] {
                let (a, b) = (find(&mut parent, first), find(&mut parent, pos[&elems[v.index()]]));
                parent[a] = b;
            }
        }
    }
    let mut glued: BTreeMap<usize, BTreeSet<GroupElement>> = BTreeMap::new();
    for (i, w) in finite.iter().enumerate() {
        glued.entry(find(&mut parent, i)).or_default().insert(w.clone());
    }
    let glued: BTreeSet<BTreeSet<GroupElement>> = glued.into_values().collect();
    let classes: BTreeSet<BTreeSet<GroupElement>> =
        table.classes.iter().map(|c| c.elements.iter().map(|w| sys.normal_form(w.word())).collect()).collect();
    if glued != classes {
        let show = |s: &BTreeSet<GroupElement>| s.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" ");
        let extra: Vec<String> = glued.difference(&classes).map(show).collect();
        return Err(Error::CellData(format!(
            "parabolic cells of {} weights {:?} glue to blocks not in the {} table: {{{}}}",
            sys.kind(),
            sys.params(),
            table.zone,
            extra.join("} {")
        )));
    }
    Ok(())
}

/// A pair `x <=_L y` with `x ~_LR y` but `x` and `y` in different left
/// cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarViolation {
    pub x: String,
    pub y: String,
}

/// Checks that inside every two-sided block, comparability in the left
/// preorder forces equality of left cells. Only elements of length at most
/// `max_len` are tested.
pub fn check_lusztig_star(
    graph: &CellGraph,
    left: &Partition,
    two_sided: &Partition,
    max_len: usize,
) -> Option<StarViolation> {
    let ball = graph.ball();
    let mut tried = BTreeSet::new();
    for y in ball.up_to(max_len) {
        let ly = left.block_of(y);
        if !tried.insert(ly) {
            continue;
        }
        let below = graph.left_below(y);
        for &x in two_sided.block(two_sided.block_of(y)) {
            if ball.length(x) <= max_len && below[x.index()] && !left.same(x, y) {
                return Some(StarViolation { x: ball.elem(x).to_string(), y: ball.elem(y).to_string() });
            }
        }
    }
    None
}

/// Checks every descriptor against the computed cells on elements of length
/// at most `max_len`: the enumerated cell must be its two-sided block, and
/// each slice `{ z_i^-1 t w z_j : i, t }` must be the left cell of `w z_j`.
pub fn check_descriptors(
    ball: &Ball,
    table: &ZoneTable,
    left: &Partition,
    two_sided: &Partition,
    max_len: usize,
) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    let cut = |b: &[Id]| -> BTreeSet<Id> { b.iter().copied().filter(|&w| ball.length(w) <= max_len).collect() };
    for d in &table.descriptors {
        if d.w_gamma.len() > max_len {
            continue;
        }
        let coords = enumerate_cell(ball, d, max_len)?;
        let cell: BTreeSet<Id> = coords.iter().map(|c| c.elem).collect();
        let w = ball.require(&d.w_gamma)?;
        if cell != cut(two_sided.block(two_sided.block_of(w))) {
            problems.push(format!("{}: enumerated cell differs from the two-sided cell of {}", d.name, d.w_gamma));
        }
        for (j, z) in d.z_set.iter().enumerate() {
            let wz = ball.system().multiply(&d.w_gamma, z);
            if wz.len() > max_len {
                continue;
            }
            let wz = ball.require(&wz)?;
            let slice: BTreeSet<Id> = coords.iter().filter(|c| c.j == j).map(|c| c.elem).collect();
            if slice != cut(left.block(left.block_of(wz))) {
                problems.push(format!("{}: slice z{} differs from the left cell of {}", d.name, j + 1, ball.elem(wz)));
            }
        }
    }
    Ok(problems)
}

/// JSON form of a partition with blocks cut down to the certified length.
/// Blocks are named after their strip when strips are given.
pub fn partition_json(ball: &Ball, kind: &str, p: &Partition, strips: Option<&Strips>, max_len: usize) -> Value {
    let blocks: Vec<Value> = p
        .blocks()
        .iter()
        .filter(|b| ball.length(b[0]) <= max_len)
        .map(|b| {
            let elements: Vec<String> =
                b.iter().filter(|&&w| ball.length(w) <= max_len).map(|&w| ball.elem(w).to_string()).collect();
            match strips {
                Some(s) => json!({ "name": format!("c{}", s.class_of(b[0])), "elements": elements }),
                None => json!({ "elements": elements }),
            }
        })
        .collect();
    json!({ "kind": kind, "radius": max_len, "blocks": blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::celldata::{descriptors_for, Zone};
    use crate::coxeter::{CoxeterSystem, GroupType};
    use crate::hecke::HeckeAlgebra;

    fn kl(kind: GroupType, params: &[u32], radius: usize) -> KLCache {
        let sys = CoxeterSystem::new(kind, params).unwrap();
        let alg = Arc::new(HeckeAlgebra::new(Arc::new(Ball::new(sys, radius))));
        KLCache::build(alg, Exec::Parallel).unwrap()
    }

    #[test]
    fn finite_dihedral_cells() {
        // Inside W_{1,2} of G2 with a > b the cells are {e}, {s2}, the
        // middle block, {s2 w0} and {w0}.
        let k = kl(GroupType::G2, &[5, 2], 8);
        let table = descriptors_for(GroupType::G2, Zone::RAbove2).unwrap();
        check_parabolic_classes(&k, &table).unwrap();
    }

    #[test]
    fn parabolic_check_catches_wrong_zone() {
        let k = kl(GroupType::G2, &[1, 2], 8);
        let table = descriptors_for(GroupType::G2, Zone::RAbove2).unwrap();
        assert!(check_parabolic_classes(&k, &table).is_err());
    }

    #[test]
    fn cells_match_strips_g2() {
        let k = kl(GroupType::G2, &[5, 2], 14);
        let g = CellGraph::build(&k, Exec::Parallel).unwrap();
        let table = descriptors_for(GroupType::G2, Zone::RAbove2).unwrap();
        let strips = Strips::build(k.ball(), &table).unwrap();
        let two = g.two_sided_cells();
        let m = interior(k.ball(), default_margin(&table));
        assert_eq!(compare_with_strips(k.ball(), &two, &strips, m), vec![]);
        let left = g.left_cells();
        assert_eq!(check_lusztig_star(&g, &left, &two, m), None);
        let s1 = k.ball().id_of(&[1]).unwrap();
        assert!(check_lusztig_star(&g, &left, &two.merged(Id::E, s1), m).is_some());
        assert_eq!(check_descriptors(k.ball(), &table, &left, &two, m).unwrap(), Vec::<String>::new());
    }

    #[test]
    fn right_cells_are_inverse_left_cells() {
        let k = kl(GroupType::B2, &[7, 2, 1], 9);
        let g = CellGraph::build(&k, Exec::Sequential).unwrap();
        let (l, r) = (g.left_cells(), g.right_cells());
        let b = k.ball();
        for x in b.ids() {
            for y in b.ids() {
                assert_eq!(l.same(x, y), r.same(b.inverse(x), b.inverse(y)));
            }
        }
    }
}
