use gwm::testgen::planted_partition_with;
use gwm::{enumerate_hierarchy, synthesize, verify_output_contract, Alphabet, SynthesisConfig};

fn main() {
    let alphabet = Alphabet::parse("ABCDE").unwrap();
    let t = std::time::Instant::now();
    let hierarchy = enumerate_hierarchy(&alphabet).unwrap();
    println!("enumerate: {:?} ({} nodes)", t.elapsed(), hierarchy.len());
    for parts in [2usize, 3, 4] {
        let t = std::time::Instant::now();
        let scenario = planted_partition_with(&hierarchy, parts, 5000 + parts as u64).unwrap();
        let gen_t = t.elapsed();
        let t = std::time::Instant::now();
        let classification = hierarchy.classify_all(&scenario.dataset).unwrap();
        let cls_t = t.elapsed();
        let t = std::time::Instant::now();
        let config = SynthesisConfig::default();
        let trocset = synthesize(&hierarchy, &classification, &scenario.dataset, &config, None).unwrap();
        let syn_t = t.elapsed();
        let report = verify_output_contract(&trocset, &hierarchy, &scenario.dataset, &config, None).unwrap();
        println!(
            "parts={}: items={} trocs={} contract={} gen={:?} classify={:?} synth={:?} steps={}",
            parts, scenario.dataset.len(), trocset.trocs.len(), report.passed(), gen_t, cls_t, syn_t,
            trocset.trace.len()
        );
    }
}
