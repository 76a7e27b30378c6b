use std::path::Path;

use super::{EpochLoss, Mode, Model, ModelConfig, ModelParams};
use crate::error::{Error, Result};

const MAGIC: &str = "segpaint-checkpoint 1";

/// A trained model together with its loss history, stored as plain text.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub history: Vec<EpochLoss>,
}

fn join(v: &[usize]) -> String {
    v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
}

fn split(v: &str) -> std::result::Result<Vec<usize>, std::num::ParseIntError> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|d| d.trim().parse()).collect()
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let c = &self.model.config;
        let mut s = format!("{MAGIC}\n");
        s += &format!("mode {}\n", c.mode.name());
        s += &format!("input_points {}\n", c.input_points);
        s += &format!("latent_dim {}\n", c.latent_dim);
        s += &format!("encoder_hidden {}\n", join(&c.encoder_hidden));
        s += &format!("head_hidden {}\n", join(&c.head_hidden));
        s += &format!("lambda {}\n", c.lambda);
        s += &format!("overlap {}\n", c.overlap);
        s += &format!("slots {}\n", c.slots);
        s += &format!("history {}\n", self.history.len());
        for h in &self.history {
            s += &h.to_csv();
            s.push('\n');
        }
        s += &format!("params {}\n", self.model.params.len());
        for v in &self.model.params.values {
            s += &format!("{v}\n");
        }
        s
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let err = |line: usize, msg: String| Error::parse(context, line + 1, msg);
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => return Err(Error::parse(context, 1, format!("missing header {MAGIC:?}"))),
        }
        let mut kv = std::collections::HashMap::new();
        let mut history = Vec::new();
        let mut values = None;
        while let Some((n, line)) = lines.next() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "history" | "params" => {
                    let count: usize = value
                        .parse()
                        .map_err(|_| err(n, format!("bad {key} count {value:?}")))?;
                    let mut body = Vec::with_capacity(count);
                    for _ in 0..count {
                        let (m, l) = lines.next().ok_or_else(|| err(n, format!("truncated {key} section")))?;
                        body.push((m, l));
                    }
                    if key == "history" {
                        for (m, l) in body {
                            history.push(EpochLoss::parse_csv(l).ok_or_else(|| err(m, format!("bad history row {l:?}")))?);
                        }
                    } else {
                        let mut v = Vec::with_capacity(count);
                        for (m, l) in body {
                            v.push(l.trim().parse::<f64>().map_err(|e| err(m, e.to_string()))?);
                        }
                        values = Some(v);
                    }
                }
                _ => {
                    kv.insert(key.to_string(), (n, value.to_string()));
                }
            }
        }
        let get = |k: &str| -> Result<&(usize, String)> {
            kv.get(k).ok_or_else(|| Error::parse(context, 0, format!("missing key {k:?}")))
        };
        let num = |k: &str| -> Result<usize> {
            let (n, v) = get(k)?;
            v.parse().map_err(|_| err(*n, format!("bad {k} {v:?}")))
        };
        let list = |k: &str| -> Result<Vec<usize>> {
            let (n, v) = get(k)?;
            split(v).map_err(|_| err(*n, format!("bad {k} {v:?}")))
        };
        let config = ModelConfig {
            mode: Mode::parse(&get("mode")?.1)?,
            input_points: num("input_points")?,
            latent_dim: num("latent_dim")?,
            encoder_hidden: list("encoder_hidden")?,
            head_hidden: list("head_hidden")?,
            lambda: num("lambda")?,
            overlap: num("overlap")?,
            slots: num("slots")?,
        };
        let values = values.ok_or_else(|| Error::parse(context, 0, "missing params section"))?;
        let mut params = ModelParams::zeros(&config)?;
        if values.len() != params.len() {
            return Err(Error::ShapeMismatch(format!(
                "{context}: {} parameters stored, config needs {}",
                values.len(),
                params.len()
            )));
        }
        params.values = values;
        Ok(Self {
            model: Model::with_params(config, params)?,
            history,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::tests::tiny_config;

    #[test]
    fn text_round_trip_is_exact() {
        let model = Model::new(tiny_config(Mode::Segments), 11).unwrap();
        let ck = Checkpoint {
            model,
            history: vec![EpochLoss {
                epoch: 0,
                total: 1.25,
                y2s: 1.0,
                b2e: 0.5,
            }],
        };
        let back = Checkpoint::parse(&ck.to_text(), "mem").unwrap();
        assert_eq!(back, ck);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Checkpoint::parse("nope\n", "mem").is_err());
        let model = Model::new(tiny_config(Mode::Pointwise), 1).unwrap();
        let text = Checkpoint { model, history: vec![] }.to_text();
        let truncated: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
        assert!(Checkpoint::parse(&truncated, "mem").is_err());
    }
}
