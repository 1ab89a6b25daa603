//! The built-in self-test: special-function identities, sampler KS tests and a reduced
//! three-way check.
use hstcn::checks::selftest;

fn main() {
    let checks = selftest(1, None);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
}
