use digitcast_core::backend::{Backend, DecimalArBackend, HttpBackend, RecordingBackend, ReplayBackend};
use digitcast_core::decimal_ar::DecimalArModel;

use crate::args::{BackendArgs, BackendKind};
use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Builds the backend chosen on the command line, wrapped in a recorder
/// when `--record` is given.
pub fn build(args: &BackendArgs, run: &RunConfig) -> Result<Box<dyn Backend>> {
    let usage = |m: &str| Err(CliError::Usage(m.to_string()));
    if args.backend != BackendKind::Replay && args.fixtures.is_some() {
        return usage("--fixtures only applies to --backend replay");
    }
    if args.backend != BackendKind::DecimalAr && (args.model.is_some() || args.train_on_history) {
        return usage("--model and --train-on-history only apply to --backend decimal-ar");
    }
    let inner: Box<dyn Backend> = match args.backend {
        BackendKind::Http => Box::new(HttpBackend::new(run.http.clone())?),
        BackendKind::Replay => match &args.fixtures {
            Some(dir) => Box::new(ReplayBackend::load(dir)?),
            None => return usage("--backend replay needs --fixtures DIR"),
        },
        BackendKind::DecimalAr => match (&args.model, args.train_on_history) {
            (Some(path), false) => Box::new(DecimalArBackend::fixed(DecimalArModel::load(path)?)),
            (None, true) => Box::new(DecimalArBackend::in_context(
                run.decimal_ar.model_config(&run.forecast),
            )?),
            _ => return usage("--backend decimal-ar needs exactly one of --model FILE or --train-on-history"),
        },
    };
    Ok(match &args.record {
        Some(dir) => Box::new(RecordingBackend::new(inner, dir.clone())?),
        None => inner,
    })
}
