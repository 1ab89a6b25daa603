//! IP against gamma_SJ with Monte Carlo and closed form, written as CSV and SVG.
use hstcn::cli::plot::emit_plot;
use hstcn::cli::sweep::{run_sweep, write_csv, SweepParam, SweepSpec};
use hstcn::cli::parse_document;
use hstcn::montecarlo::EvalPath;

fn main() {
    let doc = parse_document("").unwrap();
    let spec = SweepSpec {
        param: SweepParam::GammaSJ,
        start: -10.0,
        stop: 30.0,
        step: 5.0,
        jammer: vec![true, false],
        paths: vec![EvalPath::Mc, EvalPath::Closed],
        n_samples: 200_000,
        seed: 1,
    };
    let (rows, manifest) = run_sweep(&spec, &doc, None).expect("sweep");
    let dir = std::env::temp_dir();
    let csv = dir.join("gamma_sj.csv");
    write_csv(&rows, std::fs::File::create(&csv).unwrap()).unwrap();
    let svg = dir.join("gamma_sj.svg");
    emit_plot(&rows, &svg).unwrap();
    println!("{} rows in {} ms", rows.len(), manifest.wall_clock_ms);
    println!("wrote {} and {}", csv.display(), svg.display());
}
