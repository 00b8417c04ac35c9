pub mod fixtures;
pub mod metrics_oracle;
