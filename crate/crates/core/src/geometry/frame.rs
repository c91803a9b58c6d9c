//! Orthonormal frames and frame components of tensors at a point.

use nalgebra::Matrix4;

use crate::{Mat4, Tensor3, Tensor4, Vec4, DIM};

pub fn inner(g: &Mat4, u: &Vec4, v: &Vec4) -> f64 {
    let mut s = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            s += g[i][j] * u[i] * v[j];
        }
    }
    s
}

pub fn norm(g: &Mat4, u: &Vec4) -> f64 {
    inner(g, u, u).sqrt()
}

/// `u / |u|_g`.
pub fn normalize(g: &Mat4, u: &Vec4) -> Vec4 {
    let n = norm(g, u);
    u.map(|x| x / n)
}

/// Gram–Schmidt (two passes) of `vectors` with respect to `g`.
pub fn gram_schmidt(g: &Mat4, vectors: &[Vec4; DIM]) -> [Vec4; DIM] {
    let mut out = [[0.0; DIM]; DIM];
    for a in 0..DIM {
        let mut v = vectors[a];
        for _ in 0..2 {
            for b in 0..a {
                let c = inner(g, &v, &out[b]);
                for i in 0..DIM {
                    v[i] -= c * out[b][i];
                }
            }
        }
        out[a] = normalize(g, &v);
    }
    out
}

/// An orthonormal frame `e_a`, stored as coordinate components `e[a][i]`.
/// Built from the coordinate basis it carries the coordinate orientation.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub e: [Vec4; DIM],
}

impl Frame {
    pub fn coordinate(g: &Mat4) -> Self {
        let basis: [Vec4; DIM] = std::array::from_fn(|a| {
            let mut v = [0.0; DIM];
            v[a] = 1.0;
            v
        });
        Frame {
            e: gram_schmidt(g, &basis),
        }
    }

    pub fn from_vectors(g: &Mat4, vectors: &[Vec4; DIM]) -> Self {
        Frame {
            e: gram_schmidt(g, vectors),
        }
    }

    pub fn covector(&self, v: &Vec4) -> Vec4 {
        std::array::from_fn(|a| (0..DIM).map(|i| v[i] * self.e[a][i]).sum())
    }

    pub fn tensor2(&self, t: &Mat4) -> Mat4 {
        let mut half = [[0.0; DIM]; DIM];
        for a in 0..DIM {
            for j in 0..DIM {
                half[a][j] = (0..DIM).map(|i| self.e[a][i] * t[i][j]).sum();
            }
        }
        std::array::from_fn(|a| {
            std::array::from_fn(|b| (0..DIM).map(|j| half[a][j] * self.e[b][j]).sum())
        })
    }

    pub fn tensor3(&self, t: &Tensor3) -> Tensor3 {
        let mut out = [[[0.0; DIM]; DIM]; DIM];
        let e = &self.e;
        for a in 0..DIM {
            for b in 0..DIM {
                for c in 0..DIM {
                    let mut s = 0.0;
                    for i in 0..DIM {
                        for j in 0..DIM {
                            let eij = e[a][i] * e[b][j];
                            if eij == 0.0 {
                                continue;
                            }
                            for k in 0..DIM {
                                s += eij * e[c][k] * t[i][j][k];
                            }
                        }
                    }
                    out[a][b][c] = s;
                }
            }
        }
        out
    }

    pub fn tensor4(&self, t: &Tensor4) -> Tensor4 {
        // contract one slot at a time
        let e = &self.e;
        let mut t1 = [[[[0.0; DIM]; DIM]; DIM]; DIM];
        for a in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        t1[a][j][k][l] = (0..DIM).map(|i| e[a][i] * t[i][j][k][l]).sum();
                    }
                }
            }
        }
        let mut t2 = [[[[0.0; DIM]; DIM]; DIM]; DIM];
        for a in 0..DIM {
            for b in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        t2[a][b][k][l] = (0..DIM).map(|j| e[b][j] * t1[a][j][k][l]).sum();
                    }
                }
            }
        }
        let mut t3 = [[[[0.0; DIM]; DIM]; DIM]; DIM];
        for a in 0..DIM {
            for b in 0..DIM {
                for c in 0..DIM {
                    for l in 0..DIM {
                        t3[a][b][c][l] = (0..DIM).map(|k| e[c][k] * t2[a][b][k][l]).sum();
                    }
                }
            }
        }
        let mut t4 = [[[[0.0; DIM]; DIM]; DIM]; DIM];
        for a in 0..DIM {
            for b in 0..DIM {
                for c in 0..DIM {
                    for d in 0..DIM {
                        t4[a][b][c][d] = (0..DIM).map(|l| e[d][l] * t3[a][b][c][l]).sum();
                    }
                }
            }
        }
        t4
    }

    /// Frame matrix of a (1,1) operator `A^i_j`: `(e^a)(A e_b)`.
    pub fn operator(&self, g: &Mat4, a: &Mat4) -> Mat4 {
        std::array::from_fn(|p| {
            std::array::from_fn(|q| {
                let aq: Vec4 = std::array::from_fn(|i| (0..DIM).map(|j| a[i][j] * self.e[q][j]).sum());
                inner(g, &self.e[p], &aq)
            })
        })
    }
}

pub fn frobenius2(m: &Mat4) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn frobenius3(t: &Tensor3) -> f64 {
    t.iter().flatten().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn frobenius4(t: &Tensor4) -> f64 {
    t.iter().flatten().flatten().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs4(t: &Tensor4) -> f64 {
    t.iter().flatten().flatten().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn inverse(m: &Mat4) -> Option<Mat4> {
    let mat = Matrix4::from_fn(|i, j| m[i][j]);
    let inv = mat.try_inverse()?;
    Some(std::array::from_fn(|i| std::array::from_fn(|j| inv[(i, j)])))
}

pub fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..DIM).map(|k| a[i][k] * b[k][j]).sum()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_orthonormal() {
        let g = [
            [2.0, 0.3, 0.0, 0.1],
            [0.3, 1.0, 0.2, 0.0],
            [0.0, 0.2, 3.0, 0.4],
            [0.1, 0.0, 0.4, 1.5],
        ];
        let f = Frame::coordinate(&g);
        for a in 0..DIM {
            for b in 0..DIM {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((inner(&g, &f.e[a], &f.e[b]) - want).abs() < 1e-14);
            }
        }
        // frame components of g are the identity
        let gf = f.tensor2(&g);
        for a in 0..DIM {
            for b in 0..DIM {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((gf[a][b] - want).abs() < 1e-14);
            }
        }
    }
}
