use gwm::testgen::{planted_partition_with, planted_regex_with, Expectation};
use gwm::{enumerate_hierarchy, synthesize, verify_output_contract, Alphabet, SynthesisConfig};

fn main() {
    let config = SynthesisConfig::default();
    for syms in ["AB", "SML", "ABCD"] {
        let alphabet = Alphabet::parse(syms).unwrap();
        let t0 = std::time::Instant::now();
        let hierarchy = enumerate_hierarchy(&alphabet).unwrap();
        for parts in [2usize, 3, 4] {
            let t = std::time::Instant::now();
            let scenario = planted_partition_with(&hierarchy, parts, 1000 + parts as u64).unwrap();
            let classification = hierarchy.classify_all(&scenario.dataset).unwrap();
            let trocset = synthesize(&hierarchy, &classification, &scenario.dataset, &config, None).unwrap();
            let report = verify_output_contract(&trocset, &hierarchy, &scenario.dataset, &config, None).unwrap();
            println!(
                "|Σ|={} parts={}: trocs={} (want {}), contract={}, items={}, steps={}, {:?}",
                syms.len(), parts, trocset.trocs.len(), parts,
                report.passed(), scenario.dataset.len(), trocset.trace.len(), t.elapsed()
            );
        }
        for seed in [1u64, 2, 3] {
            let t = std::time::Instant::now();
            let scenario = planted_regex_with(&hierarchy, seed).unwrap();
            let classification = hierarchy.classify_all(&scenario.dataset).unwrap();
            let trocset = synthesize(&hierarchy, &classification, &scenario.dataset, &config, None).unwrap();
            let target = match &scenario.expected { Expectation::TargetPattern { pattern } => pattern.clone(), _ => panic!() };
            let recovered = trocset.trocs.iter().any(|t| t.pattern == target);
            println!(
                "|Σ|={} target={}: survivors={:?} recovered={} {:?}",
                syms.len(), target,
                trocset.trocs.iter().map(|t| t.pattern.clone()).collect::<Vec<_>>(),
                recovered, t.elapsed()
            );
        }
        println!("alphabet {} total {:?}", syms, t0.elapsed());
    }
}
