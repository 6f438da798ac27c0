use gwm::{enumerate_hierarchy, Alphabet};
fn main() {
    for (syms, label) in [("A", "1"), ("AB", "2"), ("SML", "3"), ("ABCD", "4"), ("ABCDE", "5")] {
        let t = std::time::Instant::now();
        let h = enumerate_hierarchy(&Alphabet::parse(syms).unwrap()).unwrap();
        println!("|Σ|={label}: {} nodes, {} edges, {:?}", h.len(),
            h.nodes.iter().map(|n| n.children.len()).sum::<usize>(), t.elapsed());
    }
}
