//! `hiersmooth synth`: write `train.jsonl` and `test.jsonl`.

use hiersmooth_core::dataset::write_jsonl;
use hiersmooth_core::harness::{make_synthetic_dataset, SyntheticSpec};
use hiersmooth_core::Domain;

use crate::output::{create_dir, write_atomic};
use crate::settings::VERSION;
use crate::{CliError, SynthArgs};

pub fn run(a: &SynthArgs) -> Result<(), CliError> {
    let domain = match a.domain.as_str() {
        "binary" => Domain::Binary,
        "real" => Domain::Real,
        other => return Err(CliError::config(format!("unknown domain `{other}`"))),
    };
    let spec = SyntheticSpec {
        n_train: a.n_train,
        n_test: a.n_test,
        n_rows: a.rows,
        n_cols: a.cols,
        domain,
        n_classes: a.classes,
        class_separation: a.separation,
        corruption: a.corruption,
        seed: a.seed,
    };
    let data = make_synthetic_dataset(&spec).map_err(CliError::from_config)?;
    create_dir(&a.out)?;
    for (name, samples) in [("train.jsonl", &data.train), ("test.jsonl", &data.test)] {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, samples).map_err(|e| CliError::failure(e.to_string()))?;
        write_atomic(&a.out.join(name), &buf)?;
    }
    let resolved = format!(
        "version = {VERSION}\nseed = {}\nn_train = {}\nn_test = {}\nrows = {}\ncols = {}\ndomain = {}\nclasses = {}\nseparation = {}\ncorruption = {}\n",
        a.seed, a.n_train, a.n_test, a.rows, a.cols, a.domain, a.classes, a.separation, a.corruption
    );
    write_atomic(&a.out.join("config.resolved"), resolved.as_bytes())?;
    println!("wrote {} train and {} test samples to {}", data.train.len(), data.test.len(), a.out.display());
    Ok(())
}
