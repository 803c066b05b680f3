use digitcast_core::datagen::{corrupt_missing, generate, SyntheticName, SyntheticSpec};
use digitcast_core::series::write_csv;

use crate::args::SynthArgs;
use crate::error::Result;

pub fn run(args: &SynthArgs) -> Result<()> {
    let name: SyntheticName = args.name.parse()?;
    let defaults = SyntheticSpec::new(name);
    let spec = SyntheticSpec {
        n_points: args.n,
        noise_sd: args.noise.unwrap_or(defaults.noise_sd),
        t_jitter_sd: args.jitter.unwrap_or(defaults.t_jitter_sd),
        seed: args.seed,
        ..defaults
    };
    let mut series = generate(&spec)?;
    if let Some(p) = args.missing {
        // A derived seed keeps the mask independent of the noise draws.
        series = corrupt_missing(&series, p, args.seed.wrapping_add(1))?;
    }
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut csv = Vec::new();
    write_csv(&mut csv, &series)?;
    std::fs::write(&args.out, csv)?;
    Ok(())
}
