//! Dataset ingestion and result output: GXL/CXL corpora, line-delimited
//! JSON stream files, synthetic drifting streams, and result CSVs.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub mod gxl;
pub mod results;
pub mod stream;
pub mod synthetic;

pub use gxl::{parse_cxl, parse_gxl, AttributeSchema};
pub use results::write_results_csv;
pub use stream::{read_stream, stream_graph_id, write_stream, StreamRecord};
pub use synthetic::{
    default_levels, generate_synthetic, letter_templates, ClassTemplate, DistortionLevel, Segment,
    SyntheticStreamSpec,
};

/// Writes the whole payload to a sibling temp file and renames it into
/// place, so failed runs never leave partial outputs.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}
