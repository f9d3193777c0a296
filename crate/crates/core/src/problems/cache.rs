use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::generate::{generate, GeneratedInstance, InstanceSpec};
use crate::error::{Error, Result};
use crate::solvers::{reference_run, Reference, ReferenceOptions};

/// Environment variable naming the cache root.
pub const CACHE_ENV: &str = "GRPDA_CACHE_DIR";

/// `$GRPDA_CACHE_DIR`, falling back to `.grpda-cache` in the working directory.
pub fn cache_root() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".grpda-cache"))
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ReferenceRecord {
    options: ReferenceOptions,
    reference: Reference,
}

/// Instances under `instances/<family>/<hash>.bin` with a `.json` spec sidecar,
/// and reference saddle points in `<hash>.ref.json`.
#[derive(Clone, Debug)]
pub struct InstanceCache {
    root: PathBuf,
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

impl InstanceCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn from_env() -> Self {
        Self::new(cache_root())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn stem(&self, spec: &InstanceSpec) -> PathBuf {
        self.root.join("instances").join(spec.family.name()).join(spec.hash())
    }

    pub fn instance_path(&self, spec: &InstanceSpec) -> PathBuf {
        self.stem(spec).with_extension("bin")
    }

    pub fn reference_path(&self, spec: &InstanceSpec) -> PathBuf {
        self.stem(spec).with_extension("ref.json")
    }

    /// Generates the instance and records it; a cached file with different
    /// bytes is reported rather than silently replaced.
    pub fn instance(&self, spec: &InstanceSpec) -> Result<GeneratedInstance> {
        let inst = generate(spec)?;
        let bytes = inst.to_bytes();
        let bin = self.instance_path(spec);
        match fs::read(&bin) {
            Ok(old) if old == bytes => {}
            Ok(_) => {
                return Err(Error::Contract(format!(
                    "cached instance {} does not match regenerated data",
                    bin.display()
                )))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                write_atomic(&bin, &bytes)?;
                write_atomic(
                    &self.stem(spec).with_extension("json"),
                    &serde_json::to_vec_pretty(&inst.provenance)?,
                )?;
            }
            Err(e) => return Err(e.into()),
        }
        Ok(inst)
    }

    /// Cached reference for `spec` computed with `options`, running it if absent.
    pub fn reference(
        &self,
        spec: &InstanceSpec,
        inst: &GeneratedInstance,
        options: &ReferenceOptions,
    ) -> Result<Reference> {
        let path = self.reference_path(spec);
        if let Ok(text) = fs::read(&path) {
            if let Ok(rec) = serde_json::from_slice::<ReferenceRecord>(&text) {
                if rec.options == *options {
                    return Ok(rec.reference);
                }
            }
        }
        let reference = reference_run(&inst.problem, options)?;
        let rec = ReferenceRecord {
            options: *options,
            reference,
        };
        write_atomic(&path, &serde_json::to_vec(&rec)?)?;
        Ok(rec.reference)
    }
}
