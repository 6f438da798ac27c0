use gwm::{enumerate_hierarchy, Alphabet};
fn main() {
    for syms in ["AB", "SML", "ABCD", "ABCDE"] {
        let h = enumerate_hierarchy(&Alphabet::parse(syms).unwrap()).unwrap();
        let max_children = h.nodes.iter().map(|n| n.children.len()).max().unwrap();
        let max_parents = h.nodes.iter().map(|n| n.parents.len()).max().unwrap();
        // sibling set sizes
        let mut max_sib = 0usize; let mut tot_sib = 0usize;
        for n in &h.nodes {
            let mut sibs = std::collections::BTreeSet::new();
            for &p in &n.parents { for &c in &h.nodes[p].children { if c != n.id { sibs.insert(c); } } }
            max_sib = max_sib.max(sibs.len());
            tot_sib += sibs.len();
        }
        let max_depth = h.nodes.iter().map(|n| n.depth).max().unwrap();
        let mut per_depth = vec![0usize; max_depth + 1];
        for n in &h.nodes { per_depth[n.depth] += 1; }
        println!("|Σ|={}: n={} max_children={} max_parents={} max_siblings={} avg_siblings={:.1} depth_hist={:?}",
            syms.len(), h.len(), max_children, max_parents, max_sib, tot_sib as f64 / h.len() as f64, per_depth);
    }
}
