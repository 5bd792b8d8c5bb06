#include "pomdpnac/filter.hpp"

#include <cmath>

#include "pomdpnac/errors.hpp"

namespace pomdpnac {

Belief::Belief(std::vector<double> p, std::string tag) : probs(std::move(p)), provenance(std::move(tag)) {
    double sum = 0.0;
    for (double v : probs) {
        if (v < 0.0) throw ValidationError("belief has a negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("belief sums to " + std::to_string(sum) + ", expected 1 within 1e-9");
    for (auto& v : probs) v /= sum;
}

Belief Belief::point_mass(int x, int n, std::string tag) {
    std::vector<double> p(static_cast<std::size_t>(n), 0.0);
    p[static_cast<std::size_t>(x)] = 1.0;
    return Belief(std::move(p), std::move(tag));
}

Belief Belief::uniform(int n, std::string tag) {
    return Belief(std::vector<double>(static_cast<std::size_t>(n), 1.0 / n), std::move(tag));
}

int History::length() const {
    if (observations.size() != actions.size())
        throw DimensionMismatch("history has " + std::to_string(observations.size()) + " observations but " +
                                std::to_string(actions.size()) + " actions");
    return static_cast<int>(actions.size());
}

Belief filter_step(const Belief& b, int y, int u, const PomdpModel& model) {
    const int nx = model.states();
    if (b.size() != nx) throw DimensionMismatch("belief length != |X|");
    std::vector<double> post(static_cast<std::size_t>(nx), 0.0);
    // Predict through P(.|., u), then weight by the observation likelihood.
    for (int x = 0; x < nx; ++x) {
        const double w = b[x];
        if (w == 0.0) continue;
        const double* row = model.p_row(x, u);
        for (int x2 = 0; x2 < nx; ++x2) post[static_cast<std::size_t>(x2)] += w * row[x2];
    }
    double norm = 0.0;
    for (int x2 = 0; x2 < nx; ++x2) {
        post[static_cast<std::size_t>(x2)] *= model.phi(x2, y);
        norm += post[static_cast<std::size_t>(x2)];
    }
    if (norm <= 0.0)
        throw DegenerateObservation("observation y=" + std::to_string(y) +
                                    " has zero probability under the predicted belief (action u=" + std::to_string(u) + ")");
    for (auto& v : post) v /= norm;
    Belief out;
    out.probs = std::move(post);
    return out;
}

Belief filter_n(const Belief& b0, const std::vector<int>& ys, const std::vector<int>& us, const PomdpModel& model) {
    if (ys.size() != us.size())
        throw DimensionMismatch("filter_n needs equally many observations and actions");
    Belief b = b0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        try {
            b = filter_step(b, ys[i], us[i], model);
        } catch (const DegenerateObservation& e) {
            throw DegenerateObservation(std::string(e.what()) + " [at step " + std::to_string(i) + "]");
        }
    }
    return b;
}

Belief observation_posterior(const Belief& prior, int y, const PomdpModel& model) {
    const int nx = model.states();
    if (prior.size() != nx) throw DimensionMismatch("prior length != |X|");
    std::vector<double> post(static_cast<std::size_t>(nx));
    double norm = 0.0;
    for (int x = 0; x < nx; ++x) {
        post[static_cast<std::size_t>(x)] = prior[x] * model.phi(x, y);
        norm += post[static_cast<std::size_t>(x)];
    }
    if (norm <= 0.0)
        throw DegenerateObservation("observation y=" + std::to_string(y) + " has zero probability under the prior");
    for (auto& v : post) v /= norm;
    Belief out;
    out.probs = std::move(post);
    return out;
}

double belief_reward(const Belief& b, int u, const PomdpModel& model) {
    double total = 0.0;
    for (int x = 0; x < model.states(); ++x) total += b[x] * model.r(x, u);
    return total;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw DimensionMismatch("tv_distance arguments differ in length");
    double l1 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) l1 += std::abs(p[i] - q[i]);
    return 0.5 * l1;
}

double tv_distance(const Belief& p, const Belief& q) { return tv_distance(p.probs, q.probs); }

}  // namespace pomdpnac
