use std::fmt;
use std::str::FromStr;

use locavqg_core::Scalar;
use locavqg_nn::{Graph, Mask, ParamId, ParamStore, Tensor, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QgenError, Result};
use crate::tokenizer::BOS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Tiny,
    Base,
    Large,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Tiny => "tiny",
            Tier::Base => "base",
            Tier::Large => "large",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tiny" => Ok(Tier::Tiny),
            "base" => Ok(Tier::Base),
            "large" => Ok(Tier::Large),
            other => Err(format!("unknown tier {other:?} (expected tiny, base or large)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub tier: Tier,
    pub vocab: usize,
    pub d_model: usize,
    pub d_ff: usize,
    pub enc_layers: usize,
    pub dec_layers: usize,
    pub max_src: usize,
    pub max_tgt: usize,
}

impl ModelConfig {
    pub fn tier(tier: Tier, vocab: usize) -> Self {
        let (layers, d_model, d_ff) = match tier {
            Tier::Tiny => (2, 32, 64),
            Tier::Base => (3, 48, 96),
            Tier::Large => (4, 64, 128),
        };
        Self {
            tier,
            vocab,
            d_model,
            d_ff,
            enc_layers: layers,
            dec_layers: layers,
            max_src: 128,
            max_tgt: 48,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab < 5
            || self.d_model == 0
            || self.d_ff == 0
            || self.enc_layers == 0
            || self.dec_layers == 0
            || self.max_src == 0
            || self.max_tgt == 0
        {
            return Err(QgenError::InvalidConfig(format!("degenerate model config {self:?}")));
        }
        Ok(())
    }

    pub fn architecture_id(&self) -> String {
        format!(
            "seq2seq-{}:enc{}:dec{}:d{}:ff{}:v{}",
            self.tier, self.enc_layers, self.dec_layers, self.d_model, self.d_ff, self.vocab
        )
    }

    fn positions(&self) -> usize {
        self.max_src.max(self.max_tgt + 1)
    }
}

#[derive(Debug, Clone, Copy)]
struct Attn {
    wq: ParamId,
    wk: ParamId,
    wv: ParamId,
    wo: ParamId,
}

#[derive(Debug, Clone, Copy)]
struct Ffn {
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
}

#[derive(Debug, Clone, Copy)]
struct EncLayer {
    norm1: ParamId,
    attn: Attn,
    norm2: ParamId,
    ffn: Ffn,
}

#[derive(Debug, Clone, Copy)]
struct DecLayer {
    norm1: ParamId,
    self_attn: Attn,
    norm2: ParamId,
    cross: Attn,
    norm3: ParamId,
    ffn: Ffn,
}

#[derive(Debug, Clone)]
struct Layout {
    tok_emb: ParamId,
    pos_emb: ParamId,
    enc: Vec<EncLayer>,
    enc_norm: ParamId,
    dec: Vec<DecLayer>,
    dec_norm: ParamId,
    out_w: ParamId,
    out_b: ParamId,
}

/// Single-head pre-norm transformer encoder-decoder.
#[derive(Debug, Clone)]
pub struct Seq2Seq<T: Scalar> {
    pub config: ModelConfig,
    /// Id of the tokenizer the embeddings were trained with.
    pub tokenizer_id: String,
    pub params: ParamStore<T>,
    layout: Layout,
}

fn build_layout<T: Scalar>(c: &ModelConfig, p: &mut ParamStore<T>, rng: &mut ChaCha8Rng) -> Layout {
    let d = c.d_model;
    let attn = |p: &mut ParamStore<T>, rng: &mut ChaCha8Rng, name: &str| Attn {
        wq: p.add_uniform(format!("{name}.wq"), d, d, d, rng),
        wk: p.add_uniform(format!("{name}.wk"), d, d, d, rng),
        wv: p.add_uniform(format!("{name}.wv"), d, d, d, rng),
        wo: p.add_uniform(format!("{name}.wo"), d, d, d, rng),
    };
    let ffn = |p: &mut ParamStore<T>, rng: &mut ChaCha8Rng, name: &str| Ffn {
        w1: p.add_uniform(format!("{name}.w1"), d, c.d_ff, d, rng),
        b1: p.add_zeros(format!("{name}.b1"), 1, c.d_ff),
        w2: p.add_uniform(format!("{name}.w2"), c.d_ff, d, c.d_ff, rng),
        b2: p.add_zeros(format!("{name}.b2"), 1, d),
    };
    let tok_emb = p.add_uniform("tok_emb", c.vocab, d, d, rng);
    let pos_emb = p.add_uniform("pos_emb", c.positions(), d, d, rng);
    let enc = (0..c.enc_layers)
        .map(|l| EncLayer {
            norm1: p.add_ones(format!("enc{l}.norm1"), 1, d),
            attn: attn(p, rng, &format!("enc{l}.attn")),
            norm2: p.add_ones(format!("enc{l}.norm2"), 1, d),
            ffn: ffn(p, rng, &format!("enc{l}.ff")),
        })
        .collect();
    let enc_norm = p.add_ones("enc.norm", 1, d);
    let dec = (0..c.dec_layers)
        .map(|l| DecLayer {
            norm1: p.add_ones(format!("dec{l}.norm1"), 1, d),
            self_attn: attn(p, rng, &format!("dec{l}.self")),
            norm2: p.add_ones(format!("dec{l}.norm2"), 1, d),
            cross: attn(p, rng, &format!("dec{l}.cross")),
            norm3: p.add_ones(format!("dec{l}.norm3"), 1, d),
            ffn: ffn(p, rng, &format!("dec{l}.ff")),
        })
        .collect();
    let dec_norm = p.add_ones("dec.norm", 1, d);
    let out_w = p.add_uniform("out.w", d, c.vocab, d, rng);
    let out_b = p.add_zeros("out.b", 1, c.vocab);
    Layout {
        tok_emb,
        pos_emb,
        enc,
        enc_norm,
        dec,
        dec_norm,
        out_w,
        out_b,
    }
}

impl<T: Scalar> Seq2Seq<T> {
    pub fn new(config: ModelConfig, tokenizer_id: impl Into<String>, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        let layout = build_layout(&config, &mut params, &mut rng);
        Ok(Self {
            config,
            tokenizer_id: tokenizer_id.into(),
            params,
            layout,
        })
    }

    /// Rebuilds a model around stored parameters, checking every shape.
    pub fn from_parts(config: ModelConfig, tokenizer_id: String, params: ParamStore<T>) -> Result<Self> {
        let fresh = Self::new(config, tokenizer_id, 0)?;
        let same = fresh.params.len() == params.len()
            && fresh.params.ids().all(|id| {
                fresh.params.get(id).shape() == params.get(id).shape()
                    && fresh.params.name(id) == params.name(id)
            });
        if !same {
            return Err(QgenError::Shape(
                "stored parameters do not match the model config".into(),
            ));
        }
        Ok(Self { params, ..fresh })
    }

    pub fn architecture_id(&self) -> String {
        self.config.architecture_id()
    }

    fn attention(&self, g: &mut Graph<'_, T>, a: &Attn, x: Var, mem: Var, mask: Mask) -> Var {
        let (wq, wk, wv, wo) = (g.param(a.wq), g.param(a.wk), g.param(a.wv), g.param(a.wo));
        let q = g.matmul(x, wq);
        let k = g.matmul(mem, wk);
        let v = g.matmul(mem, wv);
        let s = g.matmul_t(q, k);
        let s = g.scale(s, T::one() / T::of_usize(self.config.d_model).sqrt());
        let a = g.softmax_rows(s, mask);
        let o = g.matmul(a, v);
        g.matmul(o, wo)
    }

    fn ffn(&self, g: &mut Graph<'_, T>, f: &Ffn, x: Var) -> Var {
        let (w1, b1, w2, b2) = (g.param(f.w1), g.param(f.b1), g.param(f.w2), g.param(f.b2));
        let h = g.matmul(x, w1);
        let h = g.add_row(h, b1);
        let h = g.relu(h);
        let o = g.matmul(h, w2);
        g.add_row(o, b2)
    }

    fn embed(&self, g: &mut Graph<'_, T>, ids: &[usize]) -> Var {
        let tok = g.param(self.layout.tok_emb);
        let pos = g.param(self.layout.pos_emb);
        let positions: Vec<usize> = (0..ids.len()).collect();
        let e = g.gather(tok, ids);
        let p = g.gather(pos, &positions);
        g.add(e, p)
    }

    /// Encoder output for `src`, truncated to `max_src` tokens.
    pub fn encode(&self, g: &mut Graph<'_, T>, src: &[usize]) -> Var {
        let src = &src[..src.len().min(self.config.max_src)];
        let mut x = self.embed(g, src);
        for layer in &self.layout.enc {
            let gain = g.param(layer.norm1);
            let h = g.rms_norm(x, gain);
            let a = self.attention(g, &layer.attn, h, h, Mask::None);
            x = g.add(x, a);
            let gain = g.param(layer.norm2);
            let h = g.rms_norm(x, gain);
            let f = self.ffn(g, &layer.ffn, h);
            x = g.add(x, f);
        }
        let gain = g.param(self.layout.enc_norm);
        g.rms_norm(x, gain)
    }

    /// Next-token logits (one row per position of `dec_in`).
    pub fn decode(&self, g: &mut Graph<'_, T>, memory: Var, dec_in: &[usize]) -> Var {
        let mut x = self.embed(g, dec_in);
        for layer in &self.layout.dec {
            let gain = g.param(layer.norm1);
            let h = g.rms_norm(x, gain);
            let a = self.attention(g, &layer.self_attn, h, h, Mask::Causal);
            x = g.add(x, a);
            let gain = g.param(layer.norm2);
            let h = g.rms_norm(x, gain);
            let c = self.attention(g, &layer.cross, h, memory, Mask::None);
            x = g.add(x, c);
            let gain = g.param(layer.norm3);
            let h = g.rms_norm(x, gain);
            let f = self.ffn(g, &layer.ffn, h);
            x = g.add(x, f);
        }
        let gain = g.param(self.layout.dec_norm);
        let y = g.rms_norm(x, gain);
        let w = g.param(self.layout.out_w);
        let b = g.param(self.layout.out_b);
        let logits = g.matmul(y, w);
        g.add_row(logits, b)
    }

    /// Teacher-forced logits for `target`: the decoder reads `<bos> target`
    /// (truncated to `max_tgt`) and row `i` predicts token `i` of
    /// `target <eos>`.
    pub fn forward(&self, g: &mut Graph<'_, T>, src: &[usize], dec_in: &[usize]) -> Var {
        let memory = self.encode(g, src);
        self.decode(g, memory, dec_in)
    }

    /// Logits for a teacher-forced pair without keeping the graph.
    pub fn logits(&self, src: &[usize], dec_in: &[usize]) -> Tensor<T> {
        let mut g = Graph::new(&self.params);
        let out = self.forward(&mut g, src, dec_in);
        g.value(out).clone()
    }
}

/// Decoder input (`<bos>` + target) and labels (target + `<eos>`), both
/// truncated to `max_tgt + 1`.
pub fn teacher_forcing(target: &[usize], max_tgt: usize) -> (Vec<usize>, Vec<usize>) {
    let body = &target[..target.len().min(max_tgt)];
    let mut dec_in = Vec::with_capacity(body.len() + 1);
    dec_in.push(BOS);
    dec_in.extend_from_slice(body);
    let mut labels = body.to_vec();
    labels.push(crate::tokenizer::EOS);
    (dec_in, labels)
}
