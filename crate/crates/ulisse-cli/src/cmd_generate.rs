//! `ulisse generate` — write a seeded dataset file, either Gaussian
//! random walks or noisy subsequences extracted from an existing dataset.

use std::path::PathBuf;

use ulisse_core::series::{generate_random_walk, load_collection, save_collection};
use ulisse_core::Result;

use crate::common::extract_with_noise;

#[derive(clap::Args)]
#[command(about = "Generate a seeded dataset (or extract noisy queries from one)")]
pub struct Args {
    /// Number of series to produce.
    #[arg(long)]
    pub n: usize,

    /// Length of every produced series.
    #[arg(long)]
    pub len: usize,

    /// Seed for all randomness.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output dataset file.
    #[arg(long)]
    pub out: PathBuf,

    /// Extract subsequences from this dataset instead of generating
    /// random walks.
    #[arg(long)]
    pub from_data: Option<PathBuf>,

    /// Standard deviation of Gaussian noise added to extracted
    /// subsequences (requires --from-data).
    #[arg(long, default_value_t = 0.0, requires = "from_data")]
    pub noise_std: f64,
}

pub fn run(a: &Args) -> Result<()> {
    let c = match &a.from_data {
        Some(path) => {
            let source = load_collection(path)?;
            extract_with_noise(&source, a.n, a.len, a.noise_std, a.seed)?
        }
        None => generate_random_walk(a.n, a.len, a.seed)?,
    };
    save_collection(&c, &a.out)?;
    println!(
        "wrote {} series x {} points ({} total) to {}",
        c.len(),
        a.len,
        c.total_points(),
        a.out.display()
    );
    Ok(())
}
