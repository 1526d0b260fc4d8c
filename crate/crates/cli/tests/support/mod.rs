//! Temporary workspaces with a small manifest and image files.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use locavqg_cli::PipelineConfig;

pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    /// `n` tasks spread over three cities, each with four distinct image files.
    pub fn new(n: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("images");
        std::fs::create_dir_all(&images).unwrap();
        let mut manifest = String::from("task_id,lat,lon,north,east,south,west,city\n");
        for i in 0..n {
            let mut row = vec![format!("t{i:03}"), format!("{:.4}", 40.44 + i as f64 * 0.01), format!("{:.4}", -79.99 - i as f64 * 0.01)];
            for d in ["n", "e", "s", "w"] {
                let name = format!("t{i:03}_{d}.jpg");
                std::fs::write(images.join(&name), format!("image {i} {d}").as_bytes()).unwrap();
                row.push(name);
            }
            row.push(String::new());
            manifest.push_str(&row.join(","));
            manifest.push('\n');
        }
        std::fs::write(dir.path().join("manifest.csv"), manifest).unwrap();
        Self { dir }
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn out(&self) -> PathBuf {
        self.path().join("out")
    }

    /// Stub backends and desk-sized training settings.
    pub fn config(&self) -> PipelineConfig {
        let mut c = PipelineConfig::default();
        c.paths.manifest = self.path().join("manifest.csv");
        c.paths.image_dir = Some(self.path().join("images"));
        c.paths.out_dir = self.out();
        c.train.tier = locavqg_qgen::Tier::Tiny;
        c.train.epochs = 2;
        c.train.questions_per_task = 2;
        c.train.lr = 3e-3;
        c.train.val_fraction = 0.2;
        c.classifier.synthetic_size = 300;
        c.classifier.epochs = 2;
        c.infer.max_attempts = 4;
        c.infer.max_len = 12;
        c.bench.trials = 5;
        c.bench.warmup = 1;
        c.bench.stub_ms = 1;
        c
    }
}
