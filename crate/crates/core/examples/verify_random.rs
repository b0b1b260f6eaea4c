//! Randomized property suites, with and without a corrupted skip count.

use dykstra_ff::harness::verify;
use dykstra_ff::SkipRule;

fn main() {
    let seeds = 0..20;
    println!("exact skip rule");
    print!("{}", verify(seeds.clone(), SkipRule::Exact).render());
    println!("\nskip one cycle too few");
    let mutated = verify(seeds, SkipRule::OffByOne);
    println!("caught: {}", !mutated.all_passed());
}
