use gwm::testgen::planted_partition_with;
use gwm::{enumerate_hierarchy, synthesize, Alphabet, SynthesisConfig};

fn main() {
    let alphabet = Alphabet::parse("ABCD").unwrap();
    let t = std::time::Instant::now();
    let hierarchy = enumerate_hierarchy(&alphabet).unwrap();
    println!("enumerate: {:?}", t.elapsed());
    let t = std::time::Instant::now();
    let scenario = planted_partition_with(&hierarchy, 2, 1002).unwrap();
    println!("scenario build (gen+classify inside): {:?}, items={}", t.elapsed(), scenario.dataset.len());
    let t = std::time::Instant::now();
    let classification = hierarchy.classify_all(&scenario.dataset).unwrap();
    println!("classify_all: {:?}", t.elapsed());
    let t = std::time::Instant::now();
    let trocset = synthesize(&hierarchy, &classification, &scenario.dataset, &SynthesisConfig::default(), None).unwrap();
    println!("synthesize: {:?} steps={} trocs={}", t.elapsed(), trocset.trace.len(), trocset.trocs.len());
    use std::sync::atomic::Ordering::Relaxed;
    println!("decides={} pairs={} pair_misses={} sibling_calls={}",
        gwm::synthesis::DECIDE_CALLS.load(Relaxed), gwm::synthesis::PAIR_CALLS.load(Relaxed),
        gwm::synthesis::PAIR_MISSES.load(Relaxed), gwm::synthesis::SIBLING_CALLS.load(Relaxed));
}
