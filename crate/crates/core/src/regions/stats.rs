//! Allocation-light evaluation of the bound terms from raw parameter
//! arrays, used inside the optimizer loop. The table-based evaluators in
//! the parent module are the reference these must agree with.

use crate::info::{clamp_nonneg, entropy_of, DistortionMatrix};

/// Information terms depending only on `p(u,v|a)` and the source.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SourceStats {
    pub h_a_given_ue: f64,
    pub i_ua_given_b: f64,
    pub i_va_given_b: f64,
    pub i_va_given_ub: f64,
    pub h_a_given_vb: f64,
    pub i_ab_given_u: f64,
    pub i_ae_given_u: f64,
    pub distortion: f64,
}

/// Information terms depending only on the channel auxiliaries.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ChannelStats {
    pub i_qy: f64,
    pub i_ty: f64,
    pub i_xy: f64,
    /// `I(T;Y|Q) − I(T;Z|Q)`.
    pub secrecy: f64,
}

/// Fixed quantities of the source model.
#[derive(Debug, Clone)]
pub(crate) struct SourceTables {
    pub na: usize,
    pub nb: usize,
    pub ne: usize,
    pub p_ab: Vec<f64>,
    pub p_ae: Vec<f64>,
    h_ab: f64,
    h_b: f64,
}

impl SourceTables {
    pub fn new(p_abe: &[f64], na: usize, nb: usize, ne: usize) -> Self {
        let mut p_ab = vec![0.0; na * nb];
        let mut p_ae = vec![0.0; na * ne];
        let mut p_b = vec![0.0; nb];
        for a in 0..na {
            for b in 0..nb {
                for e in 0..ne {
                    let p = p_abe[(a * nb + b) * ne + e];
                    p_ab[a * nb + b] += p;
                    p_ae[a * ne + e] += p;
                    p_b[b] += p;
                }
            }
        }
        Self { na, nb, ne, h_ab: entropy_of(&p_ab), h_b: entropy_of(&p_b), p_ab, p_ae }
    }

    /// `w[(a·nu + u)·nv + v] = p(u,v|a)`.
    pub fn stats(&self, w: &[f64], nu: usize, nv: usize, distortion: &DistortionMatrix) -> SourceStats {
        let (na, nb, ne) = (self.na, self.nb, self.ne);

        let mut p_uvab = vec![0.0; nu * nv * na * nb];
        let mut p_uvb = vec![0.0; nu * nv * nb];
        let mut p_uab = vec![0.0; nu * na * nb];
        let mut p_ub = vec![0.0; nu * nb];
        let mut p_vab = vec![0.0; nv * na * nb];
        let mut p_vb = vec![0.0; nv * nb];
        let mut p_ua = vec![0.0; nu * na];
        for a in 0..na {
            for u in 0..nu {
                for v in 0..nv {
                    let wuv = w[(a * nu + u) * nv + v];
                    if wuv == 0.0 {
                        continue;
                    }
                    p_ua[u * na + a] += wuv;
                    for b in 0..nb {
                        let p = wuv * self.p_ab[a * nb + b];
                        p_uvab[((u * nv + v) * na + a) * nb + b] = p;
                        p_uvb[(u * nv + v) * nb + b] += p;
                        p_uab[(u * na + a) * nb + b] += p;
                        p_ub[u * nb + b] += p;
                        p_vab[(v * na + a) * nb + b] += p;
                        p_vb[v * nb + b] += p;
                    }
                }
            }
        }
        // p(u|a) -> p(u,a), p(u,a,e)
        let p_a: Vec<f64> = (0..na).map(|a| (0..nb).map(|b| self.p_ab[a * nb + b]).sum()).collect();
        let mut p_uae = vec![0.0; nu * na * ne];
        let mut p_ue = vec![0.0; nu * ne];
        let mut p_u = vec![0.0; nu];
        for u in 0..nu {
            for a in 0..na {
                let wu = p_ua[u * na + a];
                p_ua[u * na + a] = wu * p_a[a];
                p_u[u] += wu * p_a[a];
                for e in 0..ne {
                    let p = wu * self.p_ae[a * ne + e];
                    p_uae[(u * na + a) * ne + e] = p;
                    p_ue[u * ne + e] += p;
                }
            }
        }

        let h_uvab = entropy_of(&p_uvab);
        let h_uvb = entropy_of(&p_uvb);
        let h_uab = entropy_of(&p_uab);
        let h_ub = entropy_of(&p_ub);
        let h_vab = entropy_of(&p_vab);
        let h_vb = entropy_of(&p_vb);
        let h_ua = entropy_of(&p_ua);
        let h_u = entropy_of(&p_u);
        let h_uae = entropy_of(&p_uae);
        let h_ue = entropy_of(&p_ue);

        let (_, d) = reconstruct(&p_vab, nv, na, nb, distortion);
        SourceStats {
            h_a_given_ue: clamp_nonneg(h_uae - h_ue),
            i_ua_given_b: clamp_nonneg(h_ub + self.h_ab - h_uab - self.h_b),
            i_va_given_b: clamp_nonneg(h_vb + self.h_ab - h_vab - self.h_b),
            i_va_given_ub: clamp_nonneg(h_uvb + h_uab - h_uvab - h_ub),
            h_a_given_vb: clamp_nonneg(h_vab - h_vb),
            i_ab_given_u: clamp_nonneg(h_ua + h_ub - h_uab - h_u),
            i_ae_given_u: clamp_nonneg(h_ua + h_ue - h_uae - h_u),
            distortion: d,
        }
    }
}

/// Distortion-minimizing `Â(v,b)` from `p(v,a,b)` laid out `(v·na + a)·nb + b`.
pub(crate) fn reconstruct(
    p_vab: &[f64],
    nv: usize,
    na: usize,
    nb: usize,
    distortion: &DistortionMatrix,
) -> (Vec<usize>, f64) {
    let mut map = vec![0; nv * nb];
    let mut total = 0.0;
    for v in 0..nv {
        for b in 0..nb {
            let mut best = (0, f64::INFINITY);
            for a_hat in 0..distortion.reconstruction_size() {
                let cost: f64 = (0..na).map(|a| p_vab[(v * na + a) * nb + b] * distortion.get(a, a_hat)).sum();
                if cost < best.1 {
                    best = (a_hat, cost);
                }
            }
            map[v * nb + b] = best.0;
            total += best.1;
        }
    }
    (map, total)
}

/// Fixed quantities of the channel.
#[derive(Debug, Clone)]
pub(crate) struct ChannelTables {
    pub nx: usize,
    ny: usize,
    nz: usize,
    y_given_x: Vec<f64>,
    z_given_x: Vec<f64>,
    h_y_given_x: Vec<f64>,
}

impl ChannelTables {
    pub fn new(y_given_x: &[f64], z_given_x: &[f64], nx: usize, ny: usize, nz: usize) -> Self {
        let h_y_given_x = y_given_x.chunks(ny).map(entropy_of).collect();
        Self { nx, ny, nz, y_given_x: y_given_x.to_vec(), z_given_x: z_given_x.to_vec(), h_y_given_x }
    }

    /// `p_x` (nx), `t_given_x` (nx × nt), `q_given_t` (nt × nq), row-major.
    pub fn stats(&self, p_x: &[f64], t_given_x: &[f64], q_given_t: &[f64], nt: usize, nq: usize) -> ChannelStats {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let mut p_t = vec![0.0; nt];
        let mut m_y = vec![0.0; nt * ny];
        let mut m_z = vec![0.0; nt * nz];
        let mut p_y = vec![0.0; ny];
        let mut h_y_given_x = 0.0;
        for x in 0..nx {
            let px = p_x[x];
            if px == 0.0 {
                continue;
            }
            h_y_given_x += px * self.h_y_given_x[x];
            for (y, py) in p_y.iter_mut().enumerate() {
                *py += px * self.y_given_x[x * ny + y];
            }
            for t in 0..nt {
                let r = px * t_given_x[x * nt + t];
                if r == 0.0 {
                    continue;
                }
                p_t[t] += r;
                for y in 0..ny {
                    m_y[t * ny + y] += r * self.y_given_x[x * ny + y];
                }
                for z in 0..nz {
                    m_z[t * nz + z] += r * self.z_given_x[x * nz + z];
                }
            }
        }
        let mut p_q = vec![0.0; nq];
        let mut p_qt = vec![0.0; nq * nt];
        let mut p_qy = vec![0.0; nq * ny];
        let mut p_qz = vec![0.0; nq * nz];
        let mut p_qty = vec![0.0; nq * nt * ny];
        let mut p_qtz = vec![0.0; nq * nt * nz];
        for t in 0..nt {
            for q in 0..nq {
                let c = q_given_t[t * nq + q];
                if c == 0.0 {
                    continue;
                }
                p_q[q] += c * p_t[t];
                p_qt[q * nt + t] = c * p_t[t];
                for y in 0..ny {
                    let p = c * m_y[t * ny + y];
                    p_qty[(q * nt + t) * ny + y] = p;
                    p_qy[q * ny + y] += p;
                }
                for z in 0..nz {
                    let p = c * m_z[t * nz + z];
                    p_qtz[(q * nt + t) * nz + z] = p;
                    p_qz[q * nz + z] += p;
                }
            }
        }
        let (h_q, h_y, h_t) = (entropy_of(&p_q), entropy_of(&p_y), entropy_of(&p_t));
        let h_qt = entropy_of(&p_qt);
        let h_qy = entropy_of(&p_qy);
        let h_qz = entropy_of(&p_qz);
        let i_ty_q = clamp_nonneg(h_qt + h_qy - entropy_of(&p_qty) - h_q);
        let i_tz_q = clamp_nonneg(h_qt + h_qz - entropy_of(&p_qtz) - h_q);
        ChannelStats {
            i_qy: clamp_nonneg(h_q + h_y - h_qy),
            i_ty: clamp_nonneg(h_t + h_y - entropy_of(&m_y)),
            i_xy: clamp_nonneg(h_y - h_y_given_x),
            secrecy: i_ty_q - i_tz_q,
        }
    }
}
