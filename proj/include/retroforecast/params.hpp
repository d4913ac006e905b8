// Named parameter tensors with gradient slots and persistent Adam state,
// plus the bias-corrected Adam update with optional global-norm gradient
// clipping, and flat binary (little-endian doubles) + JSON manifest
// serialization. Adam state is not serialized.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "autodiff.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace rf {

struct AdamConfig {
    double lr = 2e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 0.0;  // <= 0 disables clipping

    void validate() const {
        if (!(lr > 0.0)) throw std::invalid_argument("AdamConfig: lr must be positive");
        if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
            throw std::invalid_argument("AdamConfig: betas must lie in [0,1)");
    }
};

class ParamStore {
public:
    struct Param {
        Matrix value;
        Matrix grad;
        Matrix m;  // first moment
        Matrix v;  // second moment
    };

    void define(const std::string& name, Matrix init) {
        if (index_.count(name)) throw std::invalid_argument("parameter redefined: " + name);
        Param p;
        p.grad = Matrix(init.rows(), init.cols());
        p.m = Matrix(init.rows(), init.cols());
        p.v = Matrix(init.rows(), init.cols());
        p.value = std::move(init);
        index_[name] = params_.size();
        names_.push_back(name);
        params_.push_back(std::move(p));
    }

    bool has(const std::string& name) const { return index_.count(name) != 0; }

    Param& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
        return params_[it->second];
    }
    const Param& at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
        return params_[it->second];
    }

    Matrix& value(const std::string& name) { return at(name).value; }
    const Matrix& value(const std::string& name) const { return at(name).value; }

    const std::vector<std::string>& names() const { return names_; }
    size_t count() const { return params_.size(); }
    int64_t step() const { return step_; }
    uint64_t version() const { return version_; }

    void zero_grad() {
        for (Param& p : params_) p.grad.fill(0.0);
    }

    double grad_global_norm() const {
        double s = 0.0;
        for (const Param& p : params_) s += squared_norm(p.grad);
        return std::sqrt(s);
    }

    // Rescales all gradients so the global L2 norm is at most max_norm.
    // Already-compliant gradients are untouched.
    void clip_grad_global_norm(double max_norm) {
        const double norm = grad_global_norm();
        if (norm <= max_norm || norm == 0.0) return;
        const double f = max_norm / norm;
        for (Param& p : params_)
            for (double& g : p.grad.raw()) g *= f;
    }

    void adam_step(const AdamConfig& cfg) {
        cfg.validate();
        for (size_t i = 0; i < params_.size(); ++i)
            if (!params_[i].grad.all_finite())
                throw std::runtime_error("non-finite gradient in tensor '" + names_[i] + "'");
        if (cfg.clip_norm > 0.0) clip_grad_global_norm(cfg.clip_norm);
        ++step_;
        ++version_;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_));
        for (Param& p : params_) {
            for (size_t j = 0; j < p.value.size(); ++j) {
                const double g = p.grad.raw()[j];
                double& m = p.m.raw()[j];
                double& v = p.v.raw()[j];
                m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
                v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
                p.value.raw()[j] -= cfg.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
            }
        }
    }

    // Values-only checkpoint support (Adam state deliberately kept live).
    std::vector<Matrix> snapshot_values() const {
        std::vector<Matrix> out;
        out.reserve(params_.size());
        for (const Param& p : params_) out.push_back(p.value);
        return out;
    }

    void restore_values(const std::vector<Matrix>& snap) {
        if (snap.size() != params_.size())
            throw std::invalid_argument("restore_values: parameter count mismatch");
        for (size_t i = 0; i < snap.size(); ++i) params_[i].value = snap[i];
        ++version_;
    }

    void save(const std::string& bin_path, const std::string& manifest_path) const {
        std::ofstream out(bin_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + bin_path);
        nlohmann::json manifest = nlohmann::json::array();
        for (size_t i = 0; i < params_.size(); ++i) {
            const Matrix& v = params_[i].value;
            out.write(reinterpret_cast<const char*>(v.data()),
                      static_cast<std::streamsize>(v.size() * 8));
            manifest.push_back({{"name", names_[i]}, {"rows", v.rows()}, {"cols", v.cols()}});
        }
        if (!out) throw std::runtime_error("write failed: " + bin_path);
        std::ofstream mf(manifest_path);
        if (!mf) throw std::runtime_error("cannot open for writing: " + manifest_path);
        mf << manifest.dump(2) << '\n';
    }

    static ParamStore load(const std::string& bin_path, const std::string& manifest_path) {
        std::ifstream mf(manifest_path);
        if (!mf) throw std::runtime_error("missing manifest: " + manifest_path);
        nlohmann::json manifest;
        mf >> manifest;
        ParamStore ps;
        std::ifstream in(bin_path, std::ios::binary);
        if (!in) throw std::runtime_error("missing parameter blob: " + bin_path);
        for (const auto& entry : manifest) {
            Matrix v(entry.at("rows").get<size_t>(), entry.at("cols").get<size_t>());
            in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
            if (!in) throw std::runtime_error("parameter blob truncated: " + bin_path);
            ps.define(entry.at("name").get<std::string>(), std::move(v));
        }
        return ps;
    }

private:
    std::vector<std::string> names_;
    std::vector<Param> params_;
    std::unordered_map<std::string, size_t> index_;
    int64_t step_ = 0;
    uint64_t version_ = 0;
};

// One forward/backward pass: binds parameters to tape leaves (one leaf per
// parameter, reused on repeated lookups) and routes leaf gradients back into
// the trainable store. Frozen stores (read-only model parts, e.g. a trained
// flow during MAP) can be attached as additional lookup sources; their
// gradients are computed on the tape but never accumulated. backward()
// refuses to run if the trainable store was mutated after the forward pass
// was recorded.
class PassContext {
public:
    PassContext(ad::Tape& tape, ParamStore& store)
        : tape_(tape), trainable_(&store), version_at_start_(store.version()) {}

    explicit PassContext(ad::Tape& tape) : tape_(tape) {}

    void add_frozen(const ParamStore& store) { frozen_.push_back(&store); }

    ad::Var param(const std::string& name) {
        auto it = bound_.find(name);
        if (it != bound_.end()) return it->second.var;
        if (trainable_ && trainable_->has(name)) {
            ad::Var v = tape_.leaf(trainable_->value(name));
            bound_[name] = Binding{v, true};
            return v;
        }
        for (const ParamStore* fs : frozen_) {
            if (fs->has(name)) {
                ad::Var v = tape_.leaf(fs->value(name));
                bound_[name] = Binding{v, false};
                return v;
            }
        }
        throw std::out_of_range("unknown parameter: " + name);
    }

    ad::Var constant(Matrix m) { return tape_.leaf(std::move(m)); }

    ad::Tape& tape() { return tape_; }

    // Backward through the tape, then accumulate trainable gradients.
    void backward(ad::Var loss) {
        if (trainable_ && trainable_->version() != version_at_start_)
            throw std::runtime_error("stale tape: parameters changed after forward pass");
        tape_.backward(loss);
        if (!trainable_) return;
        for (const auto& [name, binding] : bound_) {
            if (!binding.trainable) continue;
            Matrix& g = trainable_->at(name).grad;
            const Matrix& tg = tape_.grad(binding.var);
            for (size_t i = 0; i < g.size(); ++i) g.raw()[i] += tg.raw()[i];
        }
    }

private:
    struct Binding {
        ad::Var var;
        bool trainable;
    };
    ad::Tape& tape_;
    ParamStore* trainable_ = nullptr;
    std::vector<const ParamStore*> frozen_;
    uint64_t version_at_start_ = 0;
    std::unordered_map<std::string, Binding> bound_;
};

}  // namespace rf
