//! Fixtures shared by the benchmarks under `benches/`.

use krivine::arith::Signature;
use krivine::kam::MachineConfig;
use krivine::negtrans::{translate_process, Inliner};
use krivine::script::{parse_script, Runner};
use krivine::stdlib::{demo_script, Build};
use krivine::{parse_term, Process, Stack, Term};

/// Machine configuration after loading the demo definitions for `c`.
pub fn demo_config(c: u64, build: Build) -> MachineConfig {
    let mut runner = Runner::default();
    let script = parse_script(&demo_script(c, build)).expect("demo script parses");
    runner.run(&script).expect("demo script runs");
    runner.cfg
}

/// The demo realizer applied to the witness-printing continuation.
pub fn demo_process() -> Process {
    let wrapper = parse_term("\\x y. y (stop x)").expect("wrapper parses");
    Process::new(
        Term::inst("realizer"),
        Stack::from_terms([wrapper], Stack::bottom()),
    )
}

pub fn inlined_demo(cfg: &MachineConfig) -> Process {
    Inliner::new(cfg)
        .process(&demo_process())
        .expect("inlining succeeds")
}

pub fn translated_demo(cfg: &MachineConfig) -> krivine::ha2::HTerm {
    translate_process(&demo_process(), cfg).expect("translation succeeds")
}

pub fn signature() -> Signature {
    Signature::new()
}
