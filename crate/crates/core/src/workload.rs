//! DNN layers in 8-nested-loop form (B, G, K, C, OX, OY, FX, FY) and networks
//! as ordered layer lists.
//!
//! Network files are JSON:
//!
//! ```json
//! {
//!   "name": "tiny",
//!   "layers": [
//!     { "name": "conv1", "k": 16, "c": 16, "ox": 32, "oy": 32, "fx": 3, "fy": 3 },
//!     { "name": "fc", "k": 10, "c": 64, "ox": 1, "oy": 1, "fx": 1, "fy": 1, "repeat": 2 }
//!   ]
//! }
//! ```
//!
//! Optional per-layer fields: `b`, `g`, `sx`, `sy` (default 1), `repeat`
//! (default 1) and precision overrides `b_i`, `b_w`, `b_o`. Unknown fields
//! are rejected.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layer {
    pub b: u64,
    pub g: u64,
    /// Output channels per group.
    pub k: u64,
    /// Input channels per group.
    pub c: u64,
    pub ox: u64,
    pub oy: u64,
    pub fx: u64,
    pub fy: u64,
    pub sx: u64,
    pub sy: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_i: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_w: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_o: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Fc,
    Pw,
    Dw,
    Conv,
    Other,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayerKind::Fc => "fc",
            LayerKind::Pw => "pw",
            LayerKind::Dw => "dw",
            LayerKind::Conv => "conv",
            LayerKind::Other => "other",
        })
    }
}

impl Layer {
    /// Single-batch, single-group layer with unit strides.
    pub fn new(k: u64, c: u64, ox: u64, oy: u64, fx: u64, fy: u64) -> Self {
        Self {
            b: 1,
            g: 1,
            k,
            c,
            ox,
            oy,
            fx,
            fy,
            sx: 1,
            sy: 1,
            b_i: None,
            b_w: None,
            b_o: None,
        }
    }

    pub fn with_groups(mut self, g: u64) -> Self {
        self.g = g;
        self
    }

    pub fn with_batch(mut self, b: u64) -> Self {
        self.b = b;
        self
    }

    pub fn with_strides(mut self, sx: u64, sy: u64) -> Self {
        self.sx = sx;
        self.sy = sy;
        self
    }

    fn fields(&self) -> [(&'static str, u64); 10] {
        [
            ("b", self.b),
            ("g", self.g),
            ("k", self.k),
            ("c", self.c),
            ("ox", self.ox),
            ("oy", self.oy),
            ("fx", self.fx),
            ("fy", self.fy),
            ("sx", self.sx),
            ("sy", self.sy),
        ]
    }

    /// Every violated invariant, one message per field.
    pub fn violations(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .fields()
            .iter()
            .filter(|(_, value)| *value == 0)
            .map(|(name, _)| format!("{name} must be >= 1"))
            .collect();
        for (name, p) in [("b_i", self.b_i), ("b_w", self.b_w), ("b_o", self.b_o)] {
            if p == Some(0) {
                v.push(format!("{name} must be >= 1"));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidNetwork {
                name: "<layer>".into(),
                violations: v,
            })
        }
    }

    pub fn classify(&self) -> LayerKind {
        let unit_kernel = self.fx == 1 && self.fy == 1;
        if unit_kernel && self.ox == 1 && self.oy == 1 && self.g == 1 {
            LayerKind::Fc
        } else if self.k == 1 && self.c == 1 && self.g > 1 {
            LayerKind::Dw
        } else if unit_kernel && self.g == 1 && self.ox * self.oy > 1 {
            LayerKind::Pw
        } else if self.fx * self.fy > 1 && self.g == 1 {
            LayerKind::Conv
        } else {
            LayerKind::Other
        }
    }

    fn product(values: &[u64], what: &'static str) -> Result<u64> {
        values
            .iter()
            .try_fold(1u64, |acc, &v| acc.checked_mul(v))
            .ok_or(Error::Overflow { what })
    }

    pub fn total_macs(&self) -> Result<u64> {
        Self::product(
            &[
                self.b, self.g, self.k, self.c, self.ox, self.oy, self.fx, self.fy,
            ],
            "total MACs",
        )
    }

    pub fn ix(&self) -> u64 {
        (self.ox - 1) * self.sx + self.fx
    }

    pub fn iy(&self) -> u64 {
        (self.oy - 1) * self.sy + self.fy
    }

    pub fn input_elements(&self) -> Result<u64> {
        Self::product(
            &[self.b, self.g, self.c, self.ix(), self.iy()],
            "input size",
        )
    }

    pub fn weight_elements(&self) -> Result<u64> {
        Self::product(&[self.g, self.k, self.c, self.fx, self.fy], "weight size")
    }

    pub fn output_elements(&self) -> Result<u64> {
        Self::product(&[self.b, self.g, self.k, self.ox, self.oy], "output size")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayer {
    pub name: String,
    pub layer: Layer,
    pub repeat: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub name: String,
    pub layers: Vec<NetworkLayer>,
}

impl Network {
    pub fn new(name: impl Into<String>, layers: Vec<NetworkLayer>) -> Result<Self> {
        let net = Self {
            name: name.into(),
            layers,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidNetwork {
                name: self.name.clone(),
                violations: vec!["network must contain at least one layer".into()],
            });
        }
        let mut violations = Vec::new();
        for (i, nl) in self.layers.iter().enumerate() {
            for v in nl.layer.violations() {
                violations.push(format!("layer {i} ({}): {v}", nl.name));
            }
            if nl.repeat == 0 {
                violations.push(format!("layer {i} ({}): repeat must be >= 1", nl.name));
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidNetwork {
                name: self.name.clone(),
                violations,
            })
        }
    }

    pub fn total_macs(&self) -> Result<u64> {
        self.layers.iter().try_fold(0u64, |acc, nl| {
            nl.layer
                .total_macs()?
                .checked_mul(nl.repeat)
                .and_then(|m| acc.checked_add(m))
                .ok_or(Error::Overflow {
                    what: "network MACs",
                })
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    name: String,
    layers: Vec<RawLayer>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    name: Option<String>,
    repeat: Option<i64>,
    b: Option<i64>,
    g: Option<i64>,
    k: i64,
    c: i64,
    ox: i64,
    oy: i64,
    fx: i64,
    fy: i64,
    sx: Option<i64>,
    sy: Option<i64>,
    b_i: Option<i64>,
    b_w: Option<i64>,
    b_o: Option<i64>,
}

impl RawNetwork {
    /// Converts to a validated network, listing every out-of-range field.
    fn into_network(self) -> Result<Network> {
        let mut violations = Vec::new();
        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, raw) in self.layers.into_iter().enumerate() {
            let name = raw.name.clone().unwrap_or_else(|| format!("layer{i}"));
            let mut check = |field: &str, value: i64| -> u64 {
                if value < 1 {
                    violations.push(format!("layer {i} ({name}): {field} must be >= 1, got {value}"));
                    1
                } else {
                    value as u64
                }
            };
            let layer = Layer {
                b: check("b", raw.b.unwrap_or(1)),
                g: check("g", raw.g.unwrap_or(1)),
                k: check("k", raw.k),
                c: check("c", raw.c),
                ox: check("ox", raw.ox),
                oy: check("oy", raw.oy),
                fx: check("fx", raw.fx),
                fy: check("fy", raw.fy),
                sx: check("sx", raw.sx.unwrap_or(1)),
                sy: check("sy", raw.sy.unwrap_or(1)),
                b_i: raw.b_i.map(|v| check("b_i", v) as u32),
                b_w: raw.b_w.map(|v| check("b_w", v) as u32),
                b_o: raw.b_o.map(|v| check("b_o", v) as u32),
            };
            let repeat = check("repeat", raw.repeat.unwrap_or(1));
            layers.push(NetworkLayer {
                name,
                layer,
                repeat,
            });
        }
        if !violations.is_empty() {
            return Err(Error::InvalidNetwork {
                name: self.name,
                violations,
            });
        }
        Network::new(self.name, layers)
    }
}

/// Parses a network from JSON text; `origin` labels diagnostics.
pub fn parse_network(text: &str, origin: &Path) -> Result<Network> {
    let raw: RawNetwork = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    raw.into_network()
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_network(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn classifies_fixtures() {
        assert_eq!(fixtures::fc_layer().classify(), LayerKind::Fc);
        assert_eq!(fixtures::pw_layer().classify(), LayerKind::Pw);
        assert_eq!(fixtures::dw_layer().classify(), LayerKind::Dw);
        assert_eq!(fixtures::conv_layer().classify(), LayerKind::Conv);
        assert_eq!(
            Layer::new(4, 4, 1, 1, 1, 1).with_groups(2).classify(),
            LayerKind::Other
        );
    }

    #[test]
    fn total_macs_examples() {
        assert_eq!(fixtures::fc_layer().total_macs().unwrap(), 81_920);
        assert_eq!(fixtures::conv_layer().total_macs().unwrap(), 2_359_296);
        assert_eq!(Layer::new(1, 1, 1, 1, 1, 1).total_macs().unwrap(), 1);
        let huge = Layer::new(u64::MAX, 2, 1, 1, 1, 1);
        assert!(matches!(huge.total_macs(), Err(Error::Overflow { .. })));
    }

    #[test]
    fn tensor_sizes_with_stride() {
        let l = Layer::new(8, 3, 4, 5, 3, 3).with_strides(2, 1);
        assert_eq!(l.ix(), 9);
        assert_eq!(l.iy(), 7);
        assert_eq!(l.input_elements().unwrap(), 3 * 9 * 7);
        assert_eq!(l.weight_elements().unwrap(), 8 * 3 * 9);
        assert_eq!(l.output_elements().unwrap(), 8 * 4 * 5);
    }

    #[test]
    fn empty_network_rejected() {
        let err = parse_network(r#"{"name":"x","layers":[]}"#, Path::new("x.json")).unwrap_err();
        assert!(err.to_string().contains("network must contain at least one layer"));
    }

    #[test]
    fn negative_bound_names_field() {
        let text = r#"{"name":"x","layers":[{"k":4,"c":-3,"ox":1,"oy":1,"fx":1,"fy":1}]}"#;
        let err = parse_network(text, Path::new("x.json")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("c must be >= 1, got -3"), "{msg}");
        assert!(err.is_config_error());
    }

    #[test]
    fn unknown_field_rejected_with_position() {
        let text = "{\"name\":\"x\",\n\"layers\":[{\"k\":4,\"c\":3,\"ox\":1,\"oy\":1,\"fx\":1,\"fy\":1,\"kx\":2}]}";
        match parse_network(text, Path::new("net.json")) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("kx"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_applied() {
        let text = r#"{"name":"x","layers":[{"k":4,"c":3,"ox":2,"oy":2,"fx":1,"fy":1,"b_w":4}]}"#;
        let net = parse_network(text, Path::new("x.json")).unwrap();
        let nl = &net.layers[0];
        assert_eq!(nl.name, "layer0");
        assert_eq!(nl.repeat, 1);
        assert_eq!((nl.layer.b, nl.layer.g, nl.layer.sx, nl.layer.sy), (1, 1, 1, 1));
        assert_eq!(nl.layer.b_w, Some(4));
        assert_eq!(nl.layer.b_i, None);
    }
}
