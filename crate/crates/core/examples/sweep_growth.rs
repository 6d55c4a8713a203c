//! Reads infinite behaviour off finite truncations: a CSV sweep of closure
//! size, top rank and chain length across parameters.

use ihs_lab::runner::{sweep, ExperimentConfig};

fn main() -> ihs_lab::Result<()> {
    let configs = [
        r#"{"scenario": "mixed-kernel", "params": {"class_size": 2}, "grid": {"m_max": [1, 2, 3, 4, 5]}, "output": {"format": "csv"}}"#,
        r#"{"scenario": "refining", "grid": {"N": [0, 1, 2, 3], "b": [2]}, "output": {"format": "csv"}}"#,
        r#"{"scenario": "coarsening", "grid": {"N": [2], "b": [2, 3, 4], "eps": "1/4"}, "output": {"format": "csv"}}"#,
    ];
    for text in configs {
        let out = sweep(&ExperimentConfig::from_json(text)?)?;
        print!("{}", out.rendered);
        println!();
    }
    Ok(())
}
