#ifndef DRSMD_DATASET_HPP
#define DRSMD_DATASET_HPP

#include "drsmd/common.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace drsmd {

// Column-oriented sample of named real vectors. Immutable after construction;
// every column has the same length and contains only finite values.
class Dataset {
  public:
    static Dataset from_columns(std::vector<std::pair<std::string, Vector>> columns) {
        if (columns.empty()) throw data_error("dataset has no columns");
        const Index n = columns.front().second.size();
        if (n < 2) throw data_error("dataset needs at least 2 observations");
        Dataset d;
        for (auto& [name, values] : columns) {
            if (values.size() != n) {
                throw data_error("column '" + name + "' has length " +
                                 std::to_string(values.size()) + ", expected " +
                                 std::to_string(n));
            }
            if (!values.allFinite()) {
                throw data_error("column '" + name + "' contains NaN or Inf");
            }
            if (d.index_.count(name) > 0) {
                throw data_error("duplicate column name '" + name + "'");
            }
            d.index_[name] = d.names_.size();
            d.names_.push_back(name);
            d.columns_.push_back(std::move(values));
        }
        d.n_ = n;
        return d;
    }

    Index n() const { return n_; }
    const std::vector<std::string>& names() const { return names_; }
    bool has(const std::string& name) const { return index_.count(name) > 0; }

    const Vector& col(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw spec_error("unknown column '" + name + "'");
        return columns_[it->second];
    }

    Matrix cols(const std::vector<std::string>& cs) const {
        Matrix out(n_, static_cast<Index>(cs.size()));
        for (std::size_t k = 0; k < cs.size(); ++k) out.col(static_cast<Index>(k)) = col(cs[k]);
        return out;
    }

    // Row subset, preserving column order.
    Dataset rows(const std::vector<Index>& keep) const {
        std::vector<std::pair<std::string, Vector>> cols;
        cols.reserve(names_.size());
        for (std::size_t c = 0; c < names_.size(); ++c) {
            Vector v(static_cast<Index>(keep.size()));
            for (std::size_t r = 0; r < keep.size(); ++r) v[static_cast<Index>(r)] = columns_[c][keep[r]];
            cols.emplace_back(names_[c], std::move(v));
        }
        return from_columns(std::move(cols));
    }

  private:
    Index n_ = 0;
    std::vector<std::string> names_;
    std::vector<Vector> columns_;
    std::map<std::string, std::size_t> index_;
};

// Declares which columns play y, W, X1 (interaction covariates), X (controls)
// and Z (instruments). The parameter dimension is p = 1 + #interactions.
struct ModelSpec {
    std::string outcome;
    std::string treatment;
    std::vector<std::string> interaction_covariates;
    std::vector<std::string> controls;
    std::vector<std::string> instruments;

    Index param_dim() const { return 1 + static_cast<Index>(interaction_covariates.size()); }
};

struct DesignMatrices {
    Vector y;   // n
    Matrix P;   // n x p, column 0 = W, column k = W .* X1_k
    Matrix X;   // n x q_X controls
    Matrix Z;   // n x q_z instruments
};

inline void check_spec_columns(const Dataset& data, const ModelSpec& spec) {
    auto require = [&](const std::string& name, const char* role) {
        if (name.empty()) throw spec_error(std::string(role) + " column not set");
        if (!data.has(name))
            throw spec_error(std::string(role) + " column '" + name + "' not found");
    };
    require(spec.outcome, "outcome");
    require(spec.treatment, "treatment");
    for (const auto& c : spec.interaction_covariates) require(c, "interaction covariate");
    for (const auto& c : spec.controls) require(c, "control");
    for (const auto& c : spec.instruments) require(c, "instrument");
    if (spec.instruments.empty()) throw spec_error("at least one instrument is required");
}

inline DesignMatrices build_design(const Dataset& data, const ModelSpec& spec) {
    check_spec_columns(data, spec);
    const Index n = data.n();
    const Index p = spec.param_dim();
    if (n < p + 2) {
        throw data_error("insufficient data: n = " + std::to_string(n) +
                         " but the model has p = " + std::to_string(p) + " parameters");
    }
    DesignMatrices d;
    d.y = data.col(spec.outcome);
    const Vector& w = data.col(spec.treatment);
    d.P.resize(n, p);
    d.P.col(0) = w;
    for (Index k = 1; k < p; ++k) {
        d.P.col(k) = w.cwiseProduct(data.col(spec.interaction_covariates[static_cast<std::size_t>(k - 1)]));
    }
    d.X = data.cols(spec.controls);
    d.Z = data.cols(spec.instruments);
    return d;
}

struct ValidationIssue {
    enum class Severity { Error, Warning };
    Severity severity;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    Index n = 0;
    Index p = 0;
    Index q_controls = 0;
    Index q_instruments = 0;

    bool ok() const {
        for (const auto& i : issues)
            if (i.severity == ValidationIssue::Severity::Error) return false;
        return true;
    }
};

// Report-only inspection of raw columns against a spec: presence, lengths,
// finiteness and zero-variance treatment/instrument columns.
inline ValidationReport validate(const std::vector<std::pair<std::string, Vector>>& columns,
                                 const ModelSpec& spec) {
    ValidationReport rep;
    rep.p = spec.param_dim();
    rep.q_controls = static_cast<Index>(spec.controls.size());
    rep.q_instruments = static_cast<Index>(spec.instruments.size());

    auto err = [&](std::string m) {
        rep.issues.push_back({ValidationIssue::Severity::Error, std::move(m)});
    };
    auto warn = [&](std::string m) {
        rep.issues.push_back({ValidationIssue::Severity::Warning, std::move(m)});
    };

    std::map<std::string, const Vector*> byname;
    Index n = columns.empty() ? 0 : columns.front().second.size();
    rep.n = n;
    for (const auto& [name, v] : columns) {
        if (byname.count(name)) err("duplicate column name '" + name + "'");
        byname[name] = &v;
        if (v.size() != n)
            err("column '" + name + "' has length " + std::to_string(v.size()) +
                ", expected " + std::to_string(n));
        if (!v.allFinite()) err("column '" + name + "' contains NaN or Inf");
    }

    auto look = [&](const std::string& name, const char* role) -> const Vector* {
        auto it = byname.find(name);
        if (it == byname.end()) {
            err(std::string(role) + " column '" + name + "' not found");
            return nullptr;
        }
        return it->second;
    };
    auto constant = [](const Vector& v) {
        return v.size() == 0 || (v.array() == v[0]).all();
    };

    if (const Vector* y = look(spec.outcome, "outcome"); y && constant(*y))
        warn("outcome '" + spec.outcome + "' is constant");
    if (const Vector* w = look(spec.treatment, "treatment"); w && constant(*w))
        warn("treatment '" + spec.treatment + "' has zero variance; identification impossible");
    for (const auto& c : spec.interaction_covariates) look(c, "interaction covariate");
    for (const auto& c : spec.controls) {
        if (const Vector* v = look(c, "control"); v && constant(*v))
            warn("control '" + c + "' is constant and will be dropped from features");
    }
    for (const auto& c : spec.instruments) {
        if (const Vector* v = look(c, "instrument"); v && constant(*v))
            warn("instrument '" + c + "' has zero variance");
    }
    if (n < rep.p + 2) err("insufficient data: n < p + 2");
    return rep;
}

inline ValidationReport validate(const Dataset& data, const ModelSpec& spec) {
    std::vector<std::pair<std::string, Vector>> columns;
    for (const auto& name : data.names()) columns.emplace_back(name, data.col(name));
    return validate(columns, spec);
}

}  // namespace drsmd

#endif  // DRSMD_DATASET_HPP
