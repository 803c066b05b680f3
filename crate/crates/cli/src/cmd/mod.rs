pub mod densityfit;
pub mod forecast;
pub mod synth;
pub mod tune;
