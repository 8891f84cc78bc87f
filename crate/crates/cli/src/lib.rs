//! Library surface of the pipeline driver: configuration, manifests, artifact
//! formats, and the stage implementations behind the CLI subcommands.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod manifest;
pub mod stages;
