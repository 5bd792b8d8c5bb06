#include "pomdpnac/controllers.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pomdpnac/errors.hpp"

namespace pomdpnac {

namespace {

long long checked_pow(int base, int exp, long long cap) {
    long long v = 1;
    for (int i = 0; i < exp; ++i) {
        v *= base;
        if (v > cap) throw SizeOverflow("internal state space exceeds cap " + std::to_string(cap));
    }
    return v;
}

}  // namespace

InternalStateSpec InternalStateSpec::sliding_block(int n, int ny, int nu) {
    if (n < 0) throw ValidationError("sliding-block window length must be >= 0");
    if (ny <= 0 || nu <= 0) throw ValidationError("sliding-block spec needs positive |Y| and |U|");
    InternalStateSpec s;
    s.ny_ = ny;
    s.nu_ = nu;
    s.block_length_ = n;
    const long long cap = 2000000;
    long long zy = checked_pow(ny, n, cap);
    long long zu = checked_pow(nu, n, cap);
    if (zy * zu > cap) throw SizeOverflow("internal state space exceeds cap " + std::to_string(cap));
    s.nz_ = static_cast<int>(zy * zu);
    // Precomputed deterministic shift: drop the oldest (y,u) digit pair,
    // append the new one. Encoding: z = pack(ys) * |U|^n + pack(us), oldest
    // digit most significant.
    s.next_.assign(static_cast<std::size_t>(s.nz_) * ny * nu, 0);
    const int upow = static_cast<int>(zu);
    for (int z = 0; z < s.nz_; ++z) {
        int ys = z / upow, us = z % upow;
        for (int y = 0; y < ny; ++y) {
            for (int u = 0; u < nu; ++u) {
                int z2;
                if (n == 0) {
                    z2 = 0;
                } else {
                    int ys2 = (ys % static_cast<int>(zy / ny)) * ny + y;
                    int us2 = (us % (upow / nu)) * nu + u;
                    z2 = ys2 * upow + us2;
                }
                s.next_[static_cast<std::size_t>((z * ny + y) * nu + u)] = z2;
            }
        }
    }
    return s;
}

InternalStateSpec InternalStateSpec::generic(int nz, int ny, int nu, std::vector<double> kernel) {
    if (nz <= 0 || ny <= 0 || nu <= 0) throw ValidationError("generic internal spec needs positive sizes");
    InternalStateSpec s;
    s.nz_ = nz;
    s.ny_ = ny;
    s.nu_ = nu;
    const std::size_t want = static_cast<std::size_t>(nz) * ny * nu * nz;
    if (kernel.size() != want)
        throw DimensionMismatch("internal kernel has " + std::to_string(kernel.size()) +
                                " entries, expected " + std::to_string(want));
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int u = 0; u < nu; ++u) {
                double* row = kernel.data() + (static_cast<std::size_t>((z * ny + y) * nu + u)) * nz;
                double sum = 0.0;
                for (int z2 = 0; z2 < nz; ++z2) {
                    if (row[z2] < -1e-15 || !std::isfinite(row[z2]))
                        throw ValidationError("internal kernel entry negative or non-finite");
                    sum += row[z2];
                }
                if (std::abs(sum - 1.0) > 1e-12)
                    throw ValidationError("internal kernel row (z=" + std::to_string(z) + ",y=" + std::to_string(y) +
                                          ",u=" + std::to_string(u) + ") sums to " + std::to_string(sum));
                for (int z2 = 0; z2 < nz; ++z2) row[z2] = std::max(0.0, row[z2]) / sum;
            }
    s.kernel_ = std::move(kernel);
    return s;
}

int InternalStateSpec::block_length() const {
    if (!is_sliding_block()) throw ValidationError("block_length requested on a generic internal spec");
    return block_length_;
}

double InternalStateSpec::kernel(int z, int y, int u, int z2) const {
    if (is_sliding_block())
        return next_[static_cast<std::size_t>((z * ny_ + y) * nu_ + u)] == z2 ? 1.0 : 0.0;
    return kernel_[(static_cast<std::size_t>((z * ny_ + y) * nu_ + u)) * nz_ + z2];
}

int InternalStateSpec::internal_step(int z, int y, int u, RngStream& rng) const {
    if (is_sliding_block()) return next_[static_cast<std::size_t>((z * ny_ + y) * nu_ + u)];
    const double* row = kernel_.data() + (static_cast<std::size_t>((z * ny_ + y) * nu_ + u)) * nz_;
    return static_cast<int>(rng.discrete(row, nz_));
}

int InternalStateSpec::step_deterministic(int z, int y, int u) const {
    if (is_sliding_block()) return next_[static_cast<std::size_t>((z * ny_ + y) * nu_ + u)];
    const double* row = kernel_.data() + (static_cast<std::size_t>((z * ny_ + y) * nu_ + u)) * nz_;
    for (int z2 = 0; z2 < nz_; ++z2)
        if (row[z2] >= 1.0 - 1e-9) return z2;
    throw ValidationError("internal kernel row is not deterministic");
}

std::vector<int> InternalStateSpec::window_observations(int z) const {
    const int n = block_length();
    long long upow = 1;
    for (int i = 0; i < n; ++i) upow *= nu_;
    int ys = static_cast<int>(z / upow);
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = ys % ny_;
        ys /= ny_;
    }
    return out;
}

std::vector<int> InternalStateSpec::window_actions(int z) const {
    const int n = block_length();
    long long upow = 1;
    for (int i = 0; i < n; ++i) upow *= nu_;
    int us = static_cast<int>(z % upow);
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = us % nu_;
        us /= nu_;
    }
    return out;
}

int InternalStateSpec::pack_window(const std::vector<int>& ys, const std::vector<int>& us) const {
    const int n = block_length();
    if (static_cast<int>(ys.size()) != n || static_cast<int>(us.size()) != n)
        throw DimensionMismatch("window length does not match block length " + std::to_string(n));
    long long ypack = 0, upack = 0, upow = 1;
    for (int i = 0; i < n; ++i) {
        if (ys[static_cast<std::size_t>(i)] < 0 || ys[static_cast<std::size_t>(i)] >= ny_ ||
            us[static_cast<std::size_t>(i)] < 0 || us[static_cast<std::size_t>(i)] >= nu_)
            throw ValidationError("window digit out of range");
        ypack = ypack * ny_ + ys[static_cast<std::size_t>(i)];
        upack = upack * nu_ + us[static_cast<std::size_t>(i)];
        upow *= nu_;
    }
    return static_cast<int>(ypack * upow + upack);
}

FeatureMap FeatureMap::tabular(int ny, int nz, int nu, long long cap) {
    if (ny <= 0 || nz <= 0 || nu <= 0) throw ValidationError("feature map needs positive sizes");
    long long d = static_cast<long long>(ny) * nz * nu;
    if (d > cap)
        throw SizeOverflow("tabular feature dimension " + std::to_string(d) + " exceeds cap " + std::to_string(cap));
    FeatureMap f;
    f.ny_ = ny;
    f.nz_ = nz;
    f.nu_ = nu;
    f.dim_ = static_cast<int>(d);
    f.tabular_ = true;
    return f;
}

FeatureMap FeatureMap::custom(int ny, int nz, int nu, int dim, std::vector<double> rows) {
    if (ny <= 0 || nz <= 0 || nu <= 0 || dim <= 0) throw ValidationError("feature map needs positive sizes");
    const std::size_t want = static_cast<std::size_t>(ny) * nz * nu * dim;
    if (rows.size() != want)
        throw DimensionMismatch("feature rows have " + std::to_string(rows.size()) + " entries, expected " +
                                std::to_string(want));
    const std::size_t ntrip = static_cast<std::size_t>(ny) * nz * nu;
    for (std::size_t t = 0; t < ntrip; ++t) {
        double sq = 0.0;
        for (int i = 0; i < dim; ++i) {
            double v = rows[t * dim + i];
            if (!std::isfinite(v)) throw ValidationError("feature entry non-finite");
            sq += v * v;
        }
        if (sq > 1.0 + 1e-9)
            throw ValidationError("feature vector norm " + std::to_string(std::sqrt(sq)) + " exceeds 1");
    }
    FeatureMap f;
    f.ny_ = ny;
    f.nz_ = nz;
    f.nu_ = nu;
    f.dim_ = dim;
    f.tabular_ = false;
    f.rows_ = std::move(rows);
    return f;
}

double FeatureMap::dot(const Eigen::VectorXd& v, int y, int z, int u) const {
    if (tabular_) return v[triple_index(y, z, u)];
    const double* row = rows_.data() + static_cast<std::size_t>(triple_index(y, z, u)) * dim_;
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += row[i] * v[i];
    return s;
}

void FeatureMap::add_scaled(Eigen::VectorXd& acc, int y, int z, int u, double s) const {
    if (tabular_) {
        acc[triple_index(y, z, u)] += s;
        return;
    }
    const double* row = rows_.data() + static_cast<std::size_t>(triple_index(y, z, u)) * dim_;
    for (int i = 0; i < dim_; ++i) acc[i] += s * row[i];
}

void FeatureMap::copy_to(int y, int z, int u, Eigen::VectorXd& out) const {
    out.setZero(dim_);
    add_scaled(out, y, z, u, 1.0);
}

PolicyTable PolicyTable::uniform(int ny, int nz, int nu) {
    PolicyTable t;
    t.ny = ny;
    t.nz = nz;
    t.nu = nu;
    t.probs.assign(static_cast<std::size_t>(ny) * nz * nu, 1.0 / nu);
    return t;
}

PolicyTable PolicyTable::deterministic(int ny, int nz, int nu, const std::vector<int>& action_of) {
    if (static_cast<int>(action_of.size()) != ny * nz)
        throw DimensionMismatch("action map has " + std::to_string(action_of.size()) + " entries, expected " +
                                std::to_string(ny * nz));
    PolicyTable t;
    t.ny = ny;
    t.nz = nz;
    t.nu = nu;
    t.probs.assign(static_cast<std::size_t>(ny) * nz * nu, 0.0);
    for (int i = 0; i < ny * nz; ++i) {
        int u = action_of[static_cast<std::size_t>(i)];
        if (u < 0 || u >= nu) throw ValidationError("action index out of range in deterministic table");
        t.probs[static_cast<std::size_t>(i) * nu + u] = 1.0;
    }
    return t;
}

FscPolicy::FscPolicy(InternalStateSpec internal, FeatureMap features, Eigen::VectorXd theta)
    : internal_(std::move(internal)), features_(std::move(features)), theta_(std::move(theta)) {
    if (features_.observations() == 0 || features_.internal_states() != internal_.size() ||
        features_.observations() != internal_.observations() || features_.actions() != internal_.actions())
        throw DimensionMismatch("feature map sizes do not match the internal state spec");
    if (theta_.size() != features_.dim())
        throw DimensionMismatch("theta has dimension " + std::to_string(theta_.size()) + ", features expect " +
                                std::to_string(features_.dim()));
    const int ny = features_.observations(), nz = internal_.size(), nu = features_.actions();
    probs_.resize(static_cast<std::size_t>(ny) * nz * nu);
    std::vector<double> logits(static_cast<std::size_t>(nu));
    for (int y = 0; y < ny; ++y)
        for (int z = 0; z < nz; ++z) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int u = 0; u < nu; ++u) {
                logits[static_cast<std::size_t>(u)] = features_.dot(theta_, y, z, u);
                mx = std::max(mx, logits[static_cast<std::size_t>(u)]);
            }
            double zsum = 0.0;
            for (int u = 0; u < nu; ++u) {
                double e = std::exp(logits[static_cast<std::size_t>(u)] - mx);
                probs_[static_cast<std::size_t>((y * nz + z) * nu + u)] = e;
                zsum += e;
            }
            for (int u = 0; u < nu; ++u) probs_[static_cast<std::size_t>((y * nz + z) * nu + u)] /= zsum;
        }
}

FscPolicy::FscPolicy(InternalStateSpec internal, FeatureMap features)
    : FscPolicy(internal, features, Eigen::VectorXd::Zero(features.dim())) {}

Eigen::VectorXd FscPolicy::action_probs(int y, int z) const {
    const int nu = features_.actions();
    Eigen::VectorXd p(nu);
    const double* row = probs_.data() + static_cast<std::size_t>((y * internal_.size() + z)) * nu;
    for (int u = 0; u < nu; ++u) p[u] = row[u];
    return p;
}

Eigen::VectorXd FscPolicy::log_policy_gradient(int y, int z, int u) const {
    Eigen::VectorXd g(features_.dim());
    log_policy_gradient_into(y, z, u, g);
    return g;
}

void FscPolicy::log_policy_gradient_into(int y, int z, int u, Eigen::VectorXd& out) const {
    features_.copy_to(y, z, u, out);
    const int nu = features_.actions();
    const double* row = probs_.data() + static_cast<std::size_t>((y * internal_.size() + z)) * nu;
    for (int u2 = 0; u2 < nu; ++u2) features_.add_scaled(out, y, z, u2, -row[u2]);
}

int FscPolicy::sample_action(int y, int z, RngStream& rng) const {
    const int nu = features_.actions();
    const double* row = probs_.data() + static_cast<std::size_t>((y * internal_.size() + z)) * nu;
    return static_cast<int>(rng.discrete(row, nu));
}

PolicyTable FscPolicy::table() const {
    PolicyTable t;
    t.ny = features_.observations();
    t.nz = internal_.size();
    t.nu = features_.actions();
    t.probs = probs_;
    return t;
}

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ParseError("unknown key '" + it.key() + "' in " + where);
    }
}

}  // namespace

std::string FscPolicy::to_json_text() const {
    json j;
    j["kind"] = "softmax_fsc";
    j["observations"] = features_.observations();
    j["actions"] = features_.actions();
    if (internal_.is_sliding_block()) {
        j["internal"] = json{{"kind", "sliding_block"}, {"n", internal_.block_length()}};
    } else {
        const int nz = internal_.size(), ny = internal_.observations(), nu = internal_.actions();
        json kern = json::array();
        for (int z = 0; z < nz; ++z) {
            json jy = json::array();
            for (int y = 0; y < ny; ++y) {
                json ju = json::array();
                for (int u = 0; u < nu; ++u) {
                    json jz2 = json::array();
                    for (int z2 = 0; z2 < nz; ++z2) jz2.push_back(internal_.kernel(z, y, u, z2));
                    ju.push_back(std::move(jz2));
                }
                jy.push_back(std::move(ju));
            }
            kern.push_back(std::move(jy));
        }
        j["internal"] = json{{"kind", "generic"}, {"size", nz}, {"internal_kernel", std::move(kern)}};
    }
    if (features_.is_tabular()) {
        j["features"] = json{{"kind", "tabular"}};
    } else {
        const int ny = features_.observations(), nz = features_.internal_states(), nu = features_.actions();
        json rows = json::array();
        Eigen::VectorXd buf;
        for (int y = 0; y < ny; ++y)
            for (int z = 0; z < nz; ++z)
                for (int u = 0; u < nu; ++u) {
                    features_.copy_to(y, z, u, buf);
                    json row = json::array();
                    for (int i = 0; i < features_.dim(); ++i) row.push_back(buf[i]);
                    rows.push_back(std::move(row));
                }
        j["features"] = json{{"kind", "custom"}, {"dim", features_.dim()}, {"rows", std::move(rows)}};
    }
    json th = json::array();
    for (int i = 0; i < theta_.size(); ++i) th.push_back(theta_[i]);
    j["theta"] = std::move(th);
    return j.dump(2);
}

FscPolicy FscPolicy::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("policy file is not valid JSON: ") + e.what());
    }
    try {
        if (!j.is_object()) throw ParseError("policy file root must be an object");
        reject_unknown(j, {"kind", "observations", "actions", "internal", "features", "theta"}, "policy file");
        if (j.at("kind").get<std::string>() != "softmax_fsc")
            throw ParseError("policy kind must be 'softmax_fsc'");
        int ny = j.at("observations").get<int>();
        int nu = j.at("actions").get<int>();

        const json& ji = j.at("internal");
        reject_unknown(ji, {"kind", "n", "size", "internal_kernel"}, "internal spec");
        InternalStateSpec spec = [&] {
            std::string kind = ji.at("kind").get<std::string>();
            if (kind == "sliding_block") return InternalStateSpec::sliding_block(ji.at("n").get<int>(), ny, nu);
            if (kind != "generic") throw ParseError("internal kind must be 'sliding_block' or 'generic'");
            int nz = ji.at("size").get<int>();
            std::vector<double> kern;
            kern.reserve(static_cast<std::size_t>(nz) * ny * nu * nz);
            const json& jk = ji.at("internal_kernel");
            if (static_cast<int>(jk.size()) != nz) throw DimensionMismatch("internal_kernel outer size != size");
            for (const auto& jy : jk) {
                if (static_cast<int>(jy.size()) != ny) throw DimensionMismatch("internal_kernel y-dimension mismatch");
                for (const auto& ju : jy) {
                    if (static_cast<int>(ju.size()) != nu)
                        throw DimensionMismatch("internal_kernel u-dimension mismatch");
                    for (const auto& jz2 : ju) {
                        if (static_cast<int>(jz2.size()) != nz)
                            throw DimensionMismatch("internal_kernel z'-dimension mismatch");
                        for (const auto& v : jz2) kern.push_back(v.get<double>());
                    }
                }
            }
            return InternalStateSpec::generic(nz, ny, nu, std::move(kern));
        }();

        const json& jf = j.at("features");
        reject_unknown(jf, {"kind", "dim", "rows"}, "feature spec");
        FeatureMap features = [&] {
            std::string kind = jf.at("kind").get<std::string>();
            if (kind == "tabular") return FeatureMap::tabular(ny, spec.size(), nu);
            if (kind != "custom") throw ParseError("feature kind must be 'tabular' or 'custom'");
            int dim = jf.at("dim").get<int>();
            std::vector<double> rows;
            rows.reserve(static_cast<std::size_t>(ny) * spec.size() * nu * dim);
            const json& jr = jf.at("rows");
            for (const auto& row : jr) {
                if (static_cast<int>(row.size()) != dim) throw DimensionMismatch("feature row length != dim");
                for (const auto& v : row) rows.push_back(v.get<double>());
            }
            return FeatureMap::custom(ny, spec.size(), nu, dim, std::move(rows));
        }();

        const json& jt = j.at("theta");
        Eigen::VectorXd theta(jt.size());
        for (std::size_t i = 0; i < jt.size(); ++i) theta[static_cast<Eigen::Index>(i)] = jt[i].get<double>();
        return FscPolicy(std::move(spec), std::move(features), std::move(theta));
    } catch (const json::exception& e) {
        throw ParseError(std::string("policy file schema error: ") + e.what());
    }
}

FscPolicy FscPolicy::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open policy file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

void FscPolicy::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open policy file for writing: " + path);
    out << to_json_text() << "\n";
}

Eigen::VectorXd tabular_theta_for(const PolicyTable& target, const FeatureMap& features) {
    if (!features.is_tabular()) throw ValidationError("tabular_theta_for requires tabular features");
    if (target.ny != features.observations() || target.nz != features.internal_states() ||
        target.nu != features.actions())
        throw DimensionMismatch("policy table sizes do not match feature map");
    Eigen::VectorXd theta(features.dim());
    for (int y = 0; y < target.ny; ++y)
        for (int z = 0; z < target.nz; ++z)
            for (int u = 0; u < target.nu; ++u) {
                double p = target.prob(y, z, u);
                if (p <= 0.0) throw ValidationError("tabular_theta_for needs a strictly positive table");
                theta[features.triple_index(y, z, u)] = std::log(p);
            }
    return theta;
}

}  // namespace pomdpnac
