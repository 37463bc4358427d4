#include "coptact/sensor_model.hpp"

#include <algorithm>
#include <cmath>

namespace coptact::sensor {

namespace {

double clamp_eigenvalue(double ev, double ev_max) {
    const double floor = std::max(ev_max * 1e-15, 1e-300);
    return std::max(ev, floor);
}

Vector3d apply_gram_inverse(const CopPipeline& fwd, const Vector3d& rhs) {
    const Vector3d& ev = fwd.gram_eig.eigenvalues();
    const Matrix3d& q = fwd.gram_eig.eigenvectors();
    Vector3d y = q.transpose() * rhs;
    for (int k = 0; k < 3; ++k) {
        y(k) /= clamp_eigenvalue(ev(k), ev(2));
    }
    return q * y;
}

}  // namespace

void TaxelLayout::validate() const {
    const int n = size();
    if (n < 1) throw Error("TaxelLayout: empty layout");
    if (static_cast<int>(orientations.size()) != n) {
        throw Error("TaxelLayout: positions/orientations size mismatch");
    }
    if (normal_axis < 0 || normal_axis > 2) throw Error("TaxelLayout: normal_axis out of range");
    if (!(epsilon > 0.0)) throw Error("TaxelLayout: epsilon must be > 0");
    if (!(sigma > 0.0)) throw Error("TaxelLayout: sigma must be > 0");
    if (!(lambda >= 0.0)) throw Error("TaxelLayout: lambda must be >= 0");
    for (int i = 0; i < n; ++i) {
        if (!geom::Rotation::is_valid(orientations[i].matrix())) {
            throw Error("TaxelLayout: orientation " + std::to_string(i) + " is not a rotation");
        }
        for (int j = i + 1; j < n; ++j) {
            if ((positions[i] - positions[j]).norm() <= 1e-6) {
                throw Error("TaxelLayout: taxel positions " + std::to_string(i) + " and " +
                            std::to_string(j) + " coincide");
            }
        }
    }
}

std::vector<int> all_indices(const TaxelLayout& layout) {
    std::vector<int> idx(layout.size());
    for (int i = 0; i < layout.size(); ++i) idx[i] = i;
    return idx;
}

std::vector<int> active_set(const TaxelReading& reading, const TaxelLayout& layout) {
    if (static_cast<int>(reading.forces.size()) != layout.size()) {
        throw Error("active_set: reading dimension does not match layout");
    }
    std::vector<int> idx;
    for (int i = 0; i < layout.size(); ++i) {
        if (reading.forces[i].norm() > layout.epsilon) idx.push_back(i);
    }
    return idx;
}

Vector3d estimate_cop_position(const TaxelReading& reading, const TaxelLayout& layout) {
    const std::vector<int> active = active_set(reading, layout);
    if (active.empty()) throw NoContactError("estimate_cop_position: empty active set");
    Vector3d num = Vector3d::Zero();
    double den = 0.0;
    for (int i : active) {
        const double m = reading.forces[i].norm();
        num += m * layout.positions[i];
        den += m;
    }
    return num / den;
}

Vector3d estimate_cop_normal(const Vector3d& p_cop, const TaxelLayout& layout,
                             const std::vector<int>& active) {
    if (active.empty()) throw NoContactError("estimate_cop_normal: empty index set");
    for (int i : active) {
        if ((layout.positions[i] - p_cop).norm() < kCoincidenceTol) {
            return layout.normal(i);
        }
    }
    Vector3d sum = Vector3d::Zero();
    for (int i : active) {
        sum += layout.normal(i) / (layout.positions[i] - p_cop).norm();
    }
    const double n = sum.norm();
    if (n < 1e-9) throw DegenerateNormalError("estimate_cop_normal: weighted normals cancel");
    return sum / n;
}

Vector3d blended_direction(const Vector3d& p_cop, int taxel_index, const Vector3d& n_cop,
                           const TaxelLayout& layout) {
    (void)n_cop;  // the blend uses the taxel's own normal; kept in the
                  // signature for symmetry with transfer_matrix
    const Vector3d n_i = layout.normal(taxel_index);
    const Vector3d delta = layout.positions[taxel_index] - p_cop;
    const double d = delta.norm();
    if (d < kBlendCoincidenceTol) return n_i;
    const double w = std::exp(-d * d / (2.0 * layout.sigma * layout.sigma));
    const Vector3d c = w * n_i + (1.0 - w) * (delta / d);
    const double cn = c.norm();
    if (cn < 1e-9) throw DegenerateBlendError("blended_direction: blend vector cancels");
    return c / cn;
}

Matrix3d transfer_matrix(const Vector3d& p_cop, const Vector3d& n_cop, int taxel_index,
                         const TaxelLayout& layout) {
    const Vector3d bhat = blended_direction(p_cop, taxel_index, n_cop, layout);
    const double d = (layout.positions[taxel_index] - p_cop).norm();
    const double w = std::exp(-d * d / (2.0 * layout.sigma * layout.sigma));
    const Matrix3d p_shear = Matrix3d::Identity() - n_cop * n_cop.transpose();
    return w * (bhat * n_cop.transpose() + p_shear);
}

TaxelReading cop_to_taxels(const CopContact& contact, const TaxelLayout& layout) {
    if (!contact.force.allFinite() || !contact.position.allFinite()) {
        throw Error("cop_to_taxels: non-finite contact");
    }
    const Vector3d n_cop = estimate_cop_normal(contact.position, layout, all_indices(layout));
    Vector3d f = contact.force;
    if (layout.normal_only) {
        f = f.dot(n_cop) * n_cop;
    }

    TaxelReading reading;
    reading.forces.assign(layout.size(), Vector3d::Zero());
    for (int i = 0; i < layout.size(); ++i) {
        const double d = (layout.positions[i] - contact.position).norm();
        const double w = std::exp(-d * d / (2.0 * layout.sigma * layout.sigma));
        if (w < kWeightCutoff) continue;
        const Matrix3d m = transfer_matrix(contact.position, n_cop, i, layout);
        reading.forces[i] = layout.orientations[i].matrix().transpose() * (m * f);
    }
    return reading;
}

namespace {

// Shared ridge solve on stacked per-taxel systems.
void ridge_solve_into(CopPipeline& fwd, double lambda) {
    fwd.gram = fwd.a_stack.transpose() * fwd.a_stack + lambda * lambda * Matrix3d::Identity();
    fwd.gram_eig.compute(fwd.gram);
    const Vector3d& ev = fwd.gram_eig.eigenvalues();
    const double ev_min = std::max(ev(0), 0.0);
    fwd.info.condition = ev_min > 0.0 ? ev(2) / ev_min : std::numeric_limits<double>::infinity();
    fwd.info.ill_conditioned = !(fwd.info.condition <= kIllConditionedThreshold);
    fwd.f_raw = apply_gram_inverse(fwd, fwd.a_stack.transpose() * fwd.b_stack);
}

}  // namespace

CopPipeline cop_pipeline_forward(const std::vector<Vector3d>& sensor_forces,
                                 const TaxelLayout& layout) {
    const int n = layout.size();
    if (static_cast<int>(sensor_forces.size()) != n) {
        throw Error("cop_pipeline_forward: force count does not match layout");
    }
    CopPipeline fwd;
    fwd.sensor_forces = sensor_forces;

    for (int i = 0; i < n; ++i) {
        if (sensor_forces[i].norm() > layout.epsilon) fwd.active.push_back(i);
    }
    if (fwd.active.empty()) {
        fwd.valid = false;
        return fwd;
    }
    fwd.valid = true;

    Vector3d pnum = Vector3d::Zero();
    for (int i : fwd.active) {
        const double m = sensor_forces[i].norm();
        fwd.norm.push_back(m);
        fwd.norm_sum += m;
        pnum += m * layout.positions[i];
    }
    fwd.p_cop = pnum / fwd.norm_sum;

    if (layout.solve_over_all_taxels) {
        fwd.solve_idx.resize(n);
        for (int i = 0; i < n; ++i) fwd.solve_idx[i] = i;
    } else {
        fwd.solve_idx = fwd.active;
    }

    // per-taxel geometry; the inverse-distance normal spans all taxels
    fwd.dist.resize(n);
    fwd.normal.resize(n);
    for (int i = 0; i < n; ++i) {
        fwd.dist[i] = (layout.positions[i] - fwd.p_cop).norm();
        fwd.normal[i] = layout.normal(i);
        if (fwd.idw_coincident < 0 && fwd.dist[i] < kCoincidenceTol) fwd.idw_coincident = i;
    }
    if (fwd.idw_coincident >= 0) {
        fwd.n_cop = fwd.normal[fwd.idw_coincident];
    } else {
        for (int i = 0; i < n; ++i) fwd.idw_sum += fwd.normal[i] / fwd.dist[i];
        const double un = fwd.idw_sum.norm();
        if (un < 1e-9) throw DegenerateNormalError("taxels_to_cop: weighted normals cancel");
        fwd.n_cop = fwd.idw_sum / un;
    }

    // blends, transfer matrices and the stacked system over the solve set
    const int ns = static_cast<int>(fwd.solve_idx.size());
    const Matrix3d p_shear = Matrix3d::Identity() - fwd.n_cop * fwd.n_cop.transpose();
    fwd.vhat.assign(ns, Vector3d::Zero());
    fwd.weight.resize(ns);
    fwd.blend_coincident.assign(ns, false);
    fwd.cvec.assign(ns, Vector3d::Zero());
    fwd.bhat.assign(ns, Vector3d::Zero());
    fwd.transfer.resize(ns);
    fwd.a_stack.resize(3 * ns, 3);
    fwd.b_stack.resize(3 * ns);
    for (int k = 0; k < ns; ++k) {
        const int i = fwd.solve_idx[k];
        const double d = fwd.dist[i];
        fwd.weight[k] = std::exp(-d * d / (2.0 * layout.sigma * layout.sigma));
        if (d < kBlendCoincidenceTol) {
            fwd.blend_coincident[k] = true;
            fwd.bhat[k] = fwd.normal[i];
        } else {
            fwd.vhat[k] = (layout.positions[i] - fwd.p_cop) / d;
            fwd.cvec[k] = fwd.weight[k] * fwd.normal[i] + (1.0 - fwd.weight[k]) * fwd.vhat[k];
            const double cn = fwd.cvec[k].norm();
            if (cn < 1e-9) throw DegenerateBlendError("taxels_to_cop: blend vector cancels");
            fwd.bhat[k] = fwd.cvec[k] / cn;
        }
        fwd.transfer[k] = fwd.weight[k] * (fwd.bhat[k] * fwd.n_cop.transpose() + p_shear);
        fwd.a_stack.block<3, 3>(3 * k, 0) = fwd.transfer[k];
        fwd.b_stack.segment<3>(3 * k) = sensor_forces[i];
    }

    ridge_solve_into(fwd, layout.lambda);

    if (layout.normal_only) {
        fwd.f_cop = fwd.f_raw.dot(fwd.n_cop) * fwd.n_cop;
    } else {
        fwd.f_cop = fwd.f_raw;
    }
    return fwd;
}

namespace {

// Intermediate cotangents shared by the two reverse passes. Per-solve
// arrays are indexed by solve position; dnormal/ddist cover every taxel
// because the inverse-distance normal does.
struct BackwardCore {
    Vector3d df_raw = Vector3d::Zero();
    Vector3d dn_cop = Vector3d::Zero();
    std::vector<Vector3d> dg;       // per solve taxel: direct b path
    std::vector<Vector3d> dvhat;    // per solve taxel
    std::vector<double> dweight;    // per solve taxel
    std::vector<Vector3d> dnormal;  // per taxel
    std::vector<double> ddist;      // per taxel
};

BackwardCore backward_core(const CopPipeline& fwd, const TaxelLayout& layout,
                           const Vector3d& upstream) {
    const int n = layout.size();
    const int ns = static_cast<int>(fwd.solve_idx.size());
    BackwardCore bc;
    bc.dg.assign(ns, Vector3d::Zero());
    bc.dvhat.assign(ns, Vector3d::Zero());
    bc.dweight.assign(ns, 0.0);
    bc.dnormal.assign(n, Vector3d::Zero());
    bc.ddist.assign(n, 0.0);

    // normal_only projection
    if (layout.normal_only) {
        const double fn = fwd.f_raw.dot(fwd.n_cop);
        const double gn = upstream.dot(fwd.n_cop);
        bc.df_raw = gn * fwd.n_cop;
        bc.dn_cop += gn * fwd.f_raw + fn * upstream;
    } else {
        bc.df_raw = upstream;
    }

    // ridge solve: x = G^-1 A^T b
    const Vector3d ug = apply_gram_inverse(fwd, bc.df_raw);
    const VectorXd residual = fwd.b_stack - fwd.a_stack * fwd.f_raw;
    const VectorXd a_ug = fwd.a_stack * ug;
    const Matrix3d p_shear = Matrix3d::Identity() - fwd.n_cop * fwd.n_cop.transpose();
    for (int k = 0; k < ns; ++k) {
        const int i = fwd.solve_idx[k];
        bc.dg[k] = fwd.transfer[k] * ug;
        // dL/dM_k = r_k ug^T - (M_k ug) x^T   (blocks of the stacked dA)
        const Matrix3d dm = residual.segment<3>(3 * k) * ug.transpose() -
                            a_ug.segment<3>(3 * k) * fwd.f_raw.transpose();
        // M = w (bhat n^T + P_shear)
        bc.dweight[k] = dm.cwiseProduct(fwd.bhat[k] * fwd.n_cop.transpose() + p_shear).sum();
        const Vector3d dbhat = fwd.weight[k] * (dm * fwd.n_cop);
        bc.dn_cop += fwd.weight[k] * (dm.transpose() * fwd.bhat[k] - (dm + dm.transpose()) * fwd.n_cop);
        // blend normalize
        if (fwd.blend_coincident[k]) {
            bc.dnormal[i] += dbhat;
        } else {
            const double cn = fwd.cvec[k].norm();
            const Vector3d dc = (dbhat - fwd.bhat[k] * fwd.bhat[k].dot(dbhat)) / cn;
            bc.dnormal[i] += fwd.weight[k] * dc;
            bc.dvhat[k] += (1.0 - fwd.weight[k]) * dc;
            bc.dweight[k] += (fwd.normal[i] - fwd.vhat[k]).dot(dc);
        }
    }

    // inverse-distance-weighted normal over all taxels
    if (fwd.idw_coincident >= 0) {
        bc.dnormal[fwd.idw_coincident] += bc.dn_cop;
    } else {
        const double un = fwd.idw_sum.norm();
        const Vector3d du = (bc.dn_cop - fwd.n_cop * fwd.n_cop.dot(bc.dn_cop)) / un;
        for (int i = 0; i < n; ++i) {
            bc.dnormal[i] += du / fwd.dist[i];
            bc.ddist[i] -= fwd.normal[i].dot(du) / (fwd.dist[i] * fwd.dist[i]);
        }
    }
    return bc;
}

}  // namespace

std::vector<Vector3d> cop_pipeline_vjp_forces(const CopPipeline& fwd, const TaxelLayout& layout,
                                              const Vector3d& upstream) {
    const int n = layout.size();
    std::vector<Vector3d> out(n, Vector3d::Zero());
    if (!fwd.valid) return out;
    BackwardCore bc = backward_core(fwd, layout, upstream);
    const int ns = static_cast<int>(fwd.solve_idx.size());

    // position path: the distances, offset directions and Gaussian weights
    // all depend on p_cop
    const double sig2 = layout.sigma * layout.sigma;
    Vector3d dp = Vector3d::Zero();
    for (int k = 0; k < ns; ++k) {
        if (fwd.blend_coincident[k]) continue;
        const int i = fwd.solve_idx[k];
        bc.ddist[i] -= bc.dweight[k] * fwd.dist[i] * fwd.weight[k] / sig2;
        dp -= (bc.dvhat[k] - fwd.vhat[k] * fwd.vhat[k].dot(bc.dvhat[k])) / fwd.dist[i];
    }
    for (int i = 0; i < n; ++i) {
        if (bc.ddist[i] == 0.0 || fwd.dist[i] < kBlendCoincidenceTol) continue;
        dp -= bc.ddist[i] * (layout.positions[i] - fwd.p_cop) / fwd.dist[i];
    }

    // p_cop = sum(m_i p_i) / sum(m_i) over the active set
    for (size_t a = 0; a < fwd.active.size(); ++a) {
        const int i = fwd.active[a];
        const double dm = (layout.positions[i] - fwd.p_cop).dot(dp) / fwd.norm_sum;
        out[i] += dm * fwd.sensor_forces[i] / fwd.norm[a];
    }
    for (int k = 0; k < ns; ++k) {
        out[fwd.solve_idx[k]] += bc.dg[k];
    }
    return out;
}

std::vector<Matrix3d> cop_pipeline_vjp_rotations(const CopPipeline& fwd, const TaxelLayout& layout,
                                                 const std::vector<Vector3d>& taxel_forces,
                                                 const Vector3d& upstream) {
    const int n = layout.size();
    std::vector<Matrix3d> out(n, Matrix3d::Zero());
    if (!fwd.valid) return out;
    BackwardCore bc = backward_core(fwd, layout, upstream);
    const Vector3d e_axis = Vector3d::Unit(layout.normal_axis);
    for (int i = 0; i < n; ++i) {
        out[i] = bc.dnormal[i] * e_axis.transpose();
    }
    for (size_t k = 0; k < fwd.solve_idx.size(); ++k) {
        const int i = fwd.solve_idx[k];
        out[i] += bc.dg[k] * taxel_forces[i].transpose();
    }
    return out;
}

MatrixXd taxels_to_cop_force_jacobian(const std::vector<Vector3d>& sensor_forces,
                                      const TaxelLayout& layout) {
    const CopPipeline fwd = cop_pipeline_forward(sensor_forces, layout);
    MatrixXd jac = MatrixXd::Zero(3, 3 * layout.size());
    if (!fwd.valid) return jac;
    for (int r = 0; r < 3; ++r) {
        const std::vector<Vector3d> row =
            cop_pipeline_vjp_forces(fwd, layout, Vector3d::Unit(r));
        for (int i = 0; i < layout.size(); ++i) {
            jac.block<1, 3>(r, 3 * i) = row[i].transpose();
        }
    }
    return jac;
}

Vector3d solve_cop_force(const TaxelReading& reading, const Vector3d& p_cop,
                         const TaxelLayout& layout, SolveInfo* info) {
    const std::vector<int> active = active_set(reading, layout);
    if (active.empty()) throw NoContactError("solve_cop_force: empty active set");

    std::vector<int> solve_idx;
    if (layout.solve_over_all_taxels) {
        solve_idx.resize(layout.size());
        for (int i = 0; i < layout.size(); ++i) solve_idx[i] = i;
    } else {
        solve_idx = active;
    }

    const Vector3d n_cop = estimate_cop_normal(p_cop, layout, all_indices(layout));
    const int ns = static_cast<int>(solve_idx.size());
    MatrixXd a_stack(3 * ns, 3);
    VectorXd b_stack(3 * ns);
    for (int k = 0; k < ns; ++k) {
        const int i = solve_idx[k];
        a_stack.block<3, 3>(3 * k, 0) = transfer_matrix(p_cop, n_cop, i, layout);
        b_stack.segment<3>(3 * k) = layout.orientations[i].matrix() * reading.forces[i];
    }

    CopPipeline scratch;
    scratch.a_stack = std::move(a_stack);
    scratch.b_stack = std::move(b_stack);
    ridge_solve_into(scratch, layout.lambda);
    if (info) *info = scratch.info;
    return scratch.f_raw;
}

std::optional<CopContact> taxels_to_cop(const TaxelReading& reading, const TaxelLayout& layout,
                                        SolveInfo* info) {
    if (static_cast<int>(reading.forces.size()) != layout.size()) {
        throw Error("taxels_to_cop: reading dimension does not match layout");
    }
    std::vector<Vector3d> sensor_forces(layout.size());
    for (int i = 0; i < layout.size(); ++i) {
        sensor_forces[i] = layout.orientations[i].matrix() * reading.forces[i];
    }
    const CopPipeline fwd = cop_pipeline_forward(sensor_forces, layout);
    if (!fwd.valid) return std::nullopt;
    if (info) *info = fwd.info;
    CopContact contact;
    contact.force = fwd.f_cop;
    contact.position = fwd.p_cop;
    contact.active_count = static_cast<int>(fwd.active.size());
    return contact;
}

}  // namespace coptact::sensor
