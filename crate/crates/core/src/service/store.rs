use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use crate::codec::ImageFormat;
use crate::pipeline::{sha256_hex, PipelineSpec, ResolvedParams, Step, PIPELINE_VERSION};
use crate::raster::Raster;

/// How a session image came to exist.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// Decoded from uploaded bytes, stored as a content-addressed blob.
    Upload { blob: String, format: ImageFormat },
    /// Produced by a registered op; `inputs` are session ids in slot order.
    Step {
        op: String,
        params: ResolvedParams,
        inputs: Vec<String>,
    },
}

#[derive(Debug)]
pub struct SessionImage {
    pub id: String,
    seq: u64,
    pub raster: Arc<Raster>,
    pub parent: Option<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct Blob {
    pub format: ImageFormat,
    pub bytes: Arc<Vec<u8>>,
}

impl Blob {
    pub fn file_name(&self, digest: &str) -> String {
        format!("{digest}.{}", self.format.extension())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("session is full ({0} images)")]
    Full(usize),
    #[error("writing spill file: {0}")]
    Spill(#[from] std::io::Error),
}

#[derive(Default)]
struct Inner {
    images: HashMap<String, Arc<SessionImage>>,
    blobs: HashMap<String, Blob>,
}

/// Synchronized map of immutable images. Entries are only ever added.
pub struct SessionStore {
    inner: RwLock<Inner>,
    next: AtomicU64,
    max_images: usize,
    spill_dir: Option<PathBuf>,
}

impl SessionStore {
    pub fn new(max_images: usize, spill_dir: Option<PathBuf>) -> Self {
        Self {
            inner: RwLock::default(),
            next: AtomicU64::new(1),
            max_images,
            spill_dir,
        }
    }

    pub fn get(&self, id: &str) -> Option<Arc<SessionImage>> {
        self.inner.read().expect("store lock").images.get(id).cloned()
    }

    pub fn blob(&self, digest: &str) -> Option<Blob> {
        self.inner.read().expect("store lock").blobs.get(digest).cloned()
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("store lock").images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stores the upload bytes (deduplicated by SHA-256) and registers the
    /// decoded raster as a root image.
    pub fn insert_upload(&self, raster: Raster, bytes: Vec<u8>, format: ImageFormat) -> Result<Arc<SessionImage>, StoreError> {
        let digest = sha256_hex(&bytes);
        let blob = Blob {
            format,
            bytes: Arc::new(bytes),
        };
        if let Some(dir) = &self.spill_dir {
            let path = dir.join(blob.file_name(&digest));
            if !path.exists() {
                std::fs::create_dir_all(dir)?;
                std::fs::write(&path, blob.bytes.as_slice())?;
            }
        }
        self.inner
            .write()
            .expect("store lock")
            .blobs
            .entry(digest.clone())
            .or_insert(blob);
        self.insert(raster, None, Provenance::Upload { blob: digest, format })
    }

    pub fn insert_step(
        &self,
        raster: Raster,
        op: &str,
        params: ResolvedParams,
        inputs: Vec<String>,
    ) -> Result<Arc<SessionImage>, StoreError> {
        let parent = inputs.first().cloned();
        self.insert(
            raster,
            parent,
            Provenance::Step {
                op: op.to_owned(),
                params,
                inputs,
            },
        )
    }

    fn insert(&self, raster: Raster, parent: Option<String>, provenance: Provenance) -> Result<Arc<SessionImage>, StoreError> {
        let mut inner = self.inner.write().expect("store lock");
        if inner.images.len() >= self.max_images {
            return Err(StoreError::Full(self.max_images));
        }
        let seq = self.next.fetch_add(1, Ordering::Relaxed);
        let id = format!("img{seq:06}");
        let image = Arc::new(SessionImage {
            id: id.clone(),
            seq,
            raster: Arc::new(raster),
            parent,
            provenance,
        });
        inner.images.insert(id, image.clone());
        Ok(image)
    }

    /// The provenance DAG of `id` as a pipeline. Root uploads become inputs
    /// named by their id and pointing at `<sha256>.<ext>` blob files; every
    /// derived image becomes a step whose `out` is its id.
    pub fn export_pipeline(&self, id: &str) -> Option<PipelineSpec> {
        let inner = self.inner.read().expect("store lock");
        let target = inner.images.get(id)?.clone();

        let mut seen: BTreeMap<u64, Arc<SessionImage>> = BTreeMap::new();
        let mut stack = vec![target.clone()];
        while let Some(img) = stack.pop() {
            if seen.contains_key(&img.seq) {
                continue;
            }
            if let Provenance::Step { inputs, .. } = &img.provenance {
                for input in inputs {
                    stack.push(inner.images.get(input)?.clone());
                }
            }
            seen.insert(img.seq, img);
        }

        let mut spec = PipelineSpec {
            version: PIPELINE_VERSION,
            inputs: BTreeMap::new(),
            steps: Vec::new(),
            outputs: BTreeMap::new(),
        };
        // parents always have lower sequence numbers
        for img in seen.values() {
            match &img.provenance {
                Provenance::Upload { blob, format } => {
                    spec.inputs
                        .insert(img.id.clone(), format!("{blob}.{}", format.extension()));
                }
                Provenance::Step { op, params, inputs } => spec.steps.push(Step {
                    op: op.clone(),
                    params: params.clone(),
                    inputs: inputs.clone(),
                    out: img.id.clone(),
                }),
            }
        }
        if matches!(target.provenance, Provenance::Step { .. }) {
            spec.outputs.insert(target.id.clone(), format!("{}.png", target.id));
        }
        Some(spec)
    }
}
