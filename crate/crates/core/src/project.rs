//! Project configuration (`starforge.toml`) and the end-to-end pipeline.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::catalog::{
    load_catalog_unchecked, parse_ddl_unchecked, Backend, CatalogError, RelationalCatalog, SourceDescriptor,
};
use crate::cube::Cube;
use crate::design::{DesignDocument, DesignError, StarSchema};
use crate::etl::{extract, run_etl, BuiltStar, Dataset, EtlError};

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("catalog: {0}")]
    Catalog(#[from] CatalogError),
    #[error("design: {0}")]
    Design(#[from] DesignError),
    #[error("etl: {0}")]
    Etl(#[from] EtlError),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl ProjectError {
    /// 3 for data-load failures, 2 for everything caught before data is read.
    pub fn exit_code(&self) -> i32 {
        match self {
            ProjectError::Etl(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServeOptions {
    pub bind: String,
    pub port: u16,
    /// Directory of static UI assets served at `/`.
    pub assets: Option<PathBuf>,
}

/// A loaded `starforge.toml`. Relative paths are resolved against its directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectConfig {
    pub path: PathBuf,
    pub source: SourceDescriptor,
    pub design_path: PathBuf,
    pub output_dir: PathBuf,
    pub serve: ServeOptions,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    source: RawSource,
    design: RawDesign,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    serve: RawServe,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    schema: String,
    #[serde(default = "file_backend")]
    backend: String,
    catalog: Option<PathBuf>,
    data_dir: Option<PathBuf>,
    host: Option<String>,
    port: Option<u16>,
    user: Option<String>,
    secret_ref: Option<String>,
}

fn file_backend() -> String {
    "file".into()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    path: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: PathBuf,
}

impl Default for RawOutput {
    fn default() -> Self {
        RawOutput { dir: "out".into() }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawServe {
    #[serde(default = "default_bind")]
    bind: String,
    #[serde(default = "default_port")]
    port: u16,
    assets: Option<PathBuf>,
}

fn default_bind() -> String {
    "127.0.0.1".into()
}

fn default_port() -> u16 {
    8080
}

impl Default for RawServe {
    fn default() -> Self {
        RawServe { bind: default_bind(), port: default_port(), assets: None }
    }
}

impl ProjectConfig {
    pub fn load(path: &Path) -> Result<ProjectConfig, ProjectError> {
        if !path.is_file() {
            return Err(ProjectError::MissingFile(path.to_path_buf()));
        }
        let config_err = |message: String| ProjectError::Config { path: path.to_path_buf(), message };
        let text = fs::read_to_string(path).map_err(|e| config_err(e.to_string()))?;
        let raw: RawConfig = toml::from_str(&text).map_err(|e| config_err(e.to_string()))?;
        let root = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { root.join(p) };
        let s = raw.source;
        let missing = |field: &str| config_err(format!("[source] {field} is required for the {} backend", s.backend));
        let backend = match s.backend.as_str() {
            "file" => Backend::File {
                catalog_path: resolve(s.catalog.clone().ok_or_else(|| missing("catalog"))?),
                data_dir: resolve(s.data_dir.clone().ok_or_else(|| missing("data_dir"))?),
            },
            "network" => Backend::Network {
                host: s.host.clone().ok_or_else(|| missing("host"))?,
                port: s.port.ok_or_else(|| missing("port"))?,
                user: s.user.clone().ok_or_else(|| missing("user"))?,
                secret_ref: s.secret_ref.clone().ok_or_else(|| missing("secret_ref"))?,
            },
            other => return Err(config_err(format!("unknown backend {other}"))),
        };
        if raw.serve.port == 0 {
            return Err(config_err("[serve] port must be in 1-65535".into()));
        }
        Ok(ProjectConfig {
            path: path.to_path_buf(),
            source: SourceDescriptor { schema_name: s.schema, backend },
            design_path: resolve(raw.design.path),
            output_dir: resolve(raw.output.dir),
            serve: ServeOptions { bind: raw.serve.bind, port: raw.serve.port, assets: raw.serve.assets.map(resolve) },
        })
    }

    fn file_backend(&self) -> Result<(&Path, &Path), ProjectError> {
        match &self.source.backend {
            Backend::File { catalog_path, data_dir } => Ok((catalog_path, data_dir)),
            Backend::Network { host, port, .. } => Err(ProjectError::Unsupported(format!(
                "network backend {host}:{port}; export the tables to CSV and use the file backend"
            ))),
        }
    }

    /// The catalog with only structural checks applied, for reporting.
    pub fn catalog_unchecked(&self) -> Result<RelationalCatalog, ProjectError> {
        let (path, _) = self.file_backend()?;
        if !path.is_file() {
            return Err(ProjectError::MissingFile(path.to_path_buf()));
        }
        let text = fs::read_to_string(path)
            .map_err(|e| ProjectError::Config { path: path.to_path_buf(), message: e.to_string() })?;
        let catalog = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            load_catalog_unchecked(&text)?
        } else {
            parse_ddl_unchecked(&text)?
        };
        Ok(catalog.with_schema_name(&self.source.schema_name))
    }

    /// The catalog, rejected if validation reports errors.
    pub fn catalog(&self) -> Result<RelationalCatalog, ProjectError> {
        Ok(self.catalog_unchecked()?.into_valid()?)
    }

    pub fn design_document(&self) -> Result<DesignDocument, ProjectError> {
        if !self.design_path.is_file() {
            return Err(ProjectError::MissingFile(self.design_path.clone()));
        }
        let text = fs::read_to_string(&self.design_path)
            .map_err(|e| ProjectError::Config { path: self.design_path.clone(), message: e.to_string() })?;
        Ok(DesignDocument::parse(&text)?)
    }

    pub fn plan(&self) -> Result<(RelationalCatalog, StarSchema), ProjectError> {
        let catalog = self.catalog()?;
        let star = self.design_document()?.design(&catalog)?;
        Ok((catalog, star))
    }

    pub fn extract(&self, catalog: &RelationalCatalog) -> Result<Dataset, ProjectError> {
        let (_, data_dir) = self.file_backend()?;
        Ok(extract(catalog, data_dir)?)
    }

    /// Plan, extract and transform, without writing anything.
    pub fn build(&self) -> Result<Build, ProjectError> {
        let (catalog, star) = self.plan()?;
        let data = self.extract(&catalog)?;
        let built = run_etl(&star, &catalog, &data)?;
        Ok(Build { catalog, data, built })
    }

    /// Builds, writes `<out>/star`, and loads the cube.
    pub fn build_and_load(&self) -> Result<Cube, ProjectError> {
        let build = self.build()?;
        build.built.write(&self.output_dir)?;
        Ok(Cube::load(&build.built))
    }
}

pub struct Build {
    pub catalog: RelationalCatalog,
    pub data: Dataset,
    pub built: BuiltStar,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_text(text: &str) -> Result<ProjectConfig, ProjectError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("starforge.toml");
        fs::write(&path, text).unwrap();
        ProjectConfig::load(&path)
    }

    const MINIMAL: &str = "[source]\nschema = \"s\"\ncatalog = \"schema.sql\"\ndata_dir = \"data\"\n\n[design]\npath = \"d.json\"\n";

    #[test]
    fn defaults_and_relative_paths() {
        let c = load_text(MINIMAL).unwrap();
        let root = c.path.parent().unwrap().to_path_buf();
        assert_eq!(c.output_dir, root.join("out"));
        assert_eq!(c.design_path, root.join("d.json"));
        assert_eq!(c.serve, ServeOptions { bind: "127.0.0.1".into(), port: 8080, assets: None });
        let Backend::File { catalog_path, .. } = &c.source.backend else { panic!() };
        assert_eq!(catalog_path, &root.join("schema.sql"));
    }

    #[test]
    fn rejects_bad_configs() {
        let port0 = format!("{MINIMAL}\n[serve]\nport = 0\n");
        for text in [
            "[design]\npath = \"d.json\"\n",
            "[source]\nschema = \"s\"\n\n[design]\npath = \"d.json\"\n",
            "[source]\nschema = \"s\"\nbackend = \"ftp\"\n\n[design]\npath = \"d.json\"\n",
            &port0,
            &format!("{MINIMAL}colour = 1\n"),
        ] {
            let e = load_text(text).unwrap_err();
            assert!(matches!(e, ProjectError::Config { .. }), "{text}: {e}");
            assert_eq!(e.exit_code(), 2);
        }
        assert!(matches!(ProjectConfig::load(Path::new("/nonexistent/x.toml")), Err(ProjectError::MissingFile(_))));
    }
}
