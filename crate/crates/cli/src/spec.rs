//! Textual state selectors: `ghz`, `w`, `product`, `psi-tilde:p=..,eps=..`,
//! `ghz-gen:alpha=..`, `w-gen:a=..,b=..,c=..`, `haar:n=..,seed=..`,
//! `file:<path>`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use qmonogamy::linalg::hermitian_eig;
use qmonogamy::states::{
    ghz, ghz_generalized, haar_random_pure, load_state, product_zero, psi_tilde, w_generalized, w_state,
};
use qmonogamy::{DensityMatrix, DimensionList, Error, Result, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Ghz {
        n: usize,
    },
    W {
        n: usize,
    },
    Product {
        n: usize,
    },
    PsiTilde {
        p: f64,
        eps: f64,
    },
    GhzGen {
        alpha: f64,
    },
    WGen {
        a: f64,
        b: f64,
        c: f64,
    },
    /// `seed: None` falls back to the global `--seed`.
    Haar {
        n: usize,
        seed: Option<u64>,
    },
    File(PathBuf),
}

/// A resolved state, kept as a vector when it was built as one.
pub enum State {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl State {
    pub fn density(&self) -> DensityMatrix {
        match self {
            State::Pure(psi) => psi.to_density(),
            State::Mixed(rho) => rho.clone(),
        }
    }

    pub fn num_parties(&self) -> usize {
        match self {
            State::Pure(psi) => psi.num_parties(),
            State::Mixed(rho) => rho.num_parties(),
        }
    }

    /// The state vector, recovered from the top eigenvector when a pure
    /// state was loaded as a matrix.
    pub fn into_pure(self) -> Result<StateVector> {
        match self {
            State::Pure(psi) => Ok(psi),
            State::Mixed(rho) => {
                if !rho.is_pure() {
                    return Err(Error::NotPure(rho.purity()));
                }
                let eig = hermitian_eig(rho.matrix())?;
                StateVector::normalized(eig.vectors.column(0), rho.dims().clone())
            }
        }
    }
}

fn parse_kv(body: &str) -> Result<BTreeMap<&str, &str>> {
    let mut out = BTreeMap::new();
    if body.is_empty() {
        return Ok(out);
    }
    for item in body.split(',') {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{item}`")))?;
        if out.insert(k.trim(), v.trim()).is_some() {
            return Err(Error::Parse(format!("duplicate key `{}`", k.trim())));
        }
    }
    Ok(out)
}

struct Args<'a> {
    kind: &'a str,
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Args<'a> {
    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("{}: bad value `{v}` for `{key}`", self.kind))),
        }
    }

    fn need<T: FromStr>(&mut self, key: &str) -> Result<T> {
        self.take(key)?
            .ok_or_else(|| Error::Parse(format!("{}: missing `{key}`", self.kind)))
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(Error::Parse(format!("{}: unknown key `{k}`", self.kind))),
            None => Ok(()),
        }
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s.split_once(':').unwrap_or((s, ""));
        if kind == "file" {
            if body.is_empty() {
                return Err(Error::Parse("file: missing path".into()));
            }
            return Ok(StateSpec::File(PathBuf::from(body)));
        }
        let mut a = Args {
            kind,
            map: parse_kv(body)?,
        };
        let spec = match kind {
            "ghz" => StateSpec::Ghz {
                n: a.take("n")?.unwrap_or(3),
            },
            "w" => StateSpec::W {
                n: a.take("n")?.unwrap_or(3),
            },
            "product" => StateSpec::Product {
                n: a.take("n")?.unwrap_or(3),
            },
            "psi-tilde" => StateSpec::PsiTilde {
                p: a.need("p")?,
                eps: a.need("eps")?,
            },
            "ghz-gen" => StateSpec::GhzGen {
                alpha: a.need("alpha")?,
            },
            "w-gen" => StateSpec::WGen {
                a: a.need("a")?,
                b: a.need("b")?,
                c: a.need("c")?,
            },
            "haar" => StateSpec::Haar {
                n: a.need("n")?,
                seed: a.take("seed")?,
            },
            other => return Err(Error::Parse(format!("unknown state selector `{other}`"))),
        };
        a.finish()?;
        if let StateSpec::Ghz { n } | StateSpec::W { n } | StateSpec::Product { n } | StateSpec::Haar { n, .. } = spec {
            if !(2..=4).contains(&n) {
                return Err(Error::Parse(format!("{kind}: n must be between 2 and 4, got {n}")));
            }
        }
        Ok(spec)
    }
}

impl StateSpec {
    pub fn resolve(&self, default_seed: u64) -> Result<State> {
        Ok(match self {
            StateSpec::Ghz { n } => State::Pure(ghz(*n)),
            StateSpec::W { n } => State::Pure(w_state(*n)),
            StateSpec::Product { n } => State::Pure(product_zero(*n)),
            StateSpec::PsiTilde { p, eps } => State::Pure(psi_tilde(*p, *eps)?),
            StateSpec::GhzGen { alpha } => State::Pure(ghz_generalized(*alpha)?),
            StateSpec::WGen { a, b, c } => State::Pure(w_generalized(*a, *b, *c)?),
            StateSpec::Haar { n, seed } => State::Pure(haar_random_pure(
                DimensionList::qubits(*n),
                seed.unwrap_or(default_seed),
            )),
            StateSpec::File(path) => State::Mixed(load_state(path)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_selector() {
        assert_eq!("ghz".parse::<StateSpec>().unwrap(), StateSpec::Ghz { n: 3 });
        assert_eq!("w:n=4".parse::<StateSpec>().unwrap(), StateSpec::W { n: 4 });
        assert_eq!("product".parse::<StateSpec>().unwrap(), StateSpec::Product { n: 3 });
        assert_eq!(
            "psi-tilde:p=0.33333,eps=1".parse::<StateSpec>().unwrap(),
            StateSpec::PsiTilde { p: 0.33333, eps: 1.0 }
        );
        assert_eq!(
            "ghz-gen:alpha=0.7".parse::<StateSpec>().unwrap(),
            StateSpec::GhzGen { alpha: 0.7 }
        );
        assert_eq!(
            "w-gen:a=0.34,b=0.33,c=0.33".parse::<StateSpec>().unwrap(),
            StateSpec::WGen {
                a: 0.34,
                b: 0.33,
                c: 0.33
            }
        );
        assert_eq!(
            "haar:n=3,seed=9".parse::<StateSpec>().unwrap(),
            StateSpec::Haar { n: 3, seed: Some(9) }
        );
        assert_eq!(
            "file:some/dir/x.json".parse::<StateSpec>().unwrap(),
            StateSpec::File("some/dir/x.json".into())
        );
    }

    #[test]
    fn rejects_garbage() {
        for bad in [
            "ghzz",
            "psi-tilde:p=0.5",
            "psi-tilde:p=0.5,eps=x",
            "psi-tilde:p=0.5,eps=1,q=2",
            "ghz-gen:alpha=0.5,alpha=0.6",
            "haar:n=9",
            "file:",
            "w-gen:a",
        ] {
            assert!(bad.parse::<StateSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn recovers_vector_from_pure_matrix() {
        let psi = psi_tilde(0.4, 0.3).unwrap();
        let back = State::Mixed(psi.to_density()).into_pure().unwrap();
        let overlap: f64 = psi
            .amplitudes()
            .iter()
            .zip(back.amplitudes())
            .map(|(x, y)| x.conj() * y)
            .sum::<qmonogamy::C64>()
            .norm();
        assert!((overlap - 1.0).abs() < 1e-10);
    }
}
