use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Where the operational data lives.
///
/// Only the file backend is executable. The network variant keeps the connection
/// fields of a live DBMS so configurations can carry them without a format change.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum Backend {
    File {
        /// `.sql` files are read as DDL, `.json` files as catalog documents.
        catalog_path: PathBuf,
        data_dir: PathBuf,
    },
    Network {
        host: String,
        port: u16,
        user: String,
        /// Name of the environment variable holding the password.
        secret_ref: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDescriptor {
    pub schema_name: String,
    #[serde(flatten)]
    pub backend: Backend,
}

impl SourceDescriptor {
    pub fn file(
        schema_name: impl Into<String>,
        catalog_path: impl Into<PathBuf>,
        data_dir: impl Into<PathBuf>,
    ) -> Self {
        SourceDescriptor {
            schema_name: schema_name.into(),
            backend: Backend::File { catalog_path: catalog_path.into(), data_dir: data_dir.into() },
        }
    }
}
