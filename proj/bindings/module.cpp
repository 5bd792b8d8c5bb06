// Python bindings for the toolkit's main operations: models and filters,
// finite-state controllers, samplers, the m-step TD critic, the natural
// actor-critic loop, the exact error oracles, the filter-stability analyzer,
// and the experiment harness.

#include <optional>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pomdpnac/actor.hpp"
#include "pomdpnac/controllers.hpp"
#include "pomdpnac/critic.hpp"
#include "pomdpnac/errors.hpp"
#include "pomdpnac/filter.hpp"
#include "pomdpnac/harness.hpp"
#include "pomdpnac/model.hpp"
#include "pomdpnac/oracle.hpp"
#include "pomdpnac/rng.hpp"
#include "pomdpnac/sampling.hpp"
#include "pomdpnac/stability.hpp"
#include "pomdpnac/warmstart.hpp"

namespace py = pybind11;
using namespace pomdpnac;

namespace {

std::vector<bool> to_bool_vector(const std::vector<char>& v) {
    std::vector<bool> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] != 0;
    return out;
}

}  // namespace

PYBIND11_MODULE(_pomdp_nac, m) {
    m.doc() =
        "POMDP learning toolkit: natural actor-critic with finite-state controllers, "
        "m-step TD critic, exact error oracles, and filter-stability analysis";
    m.attr("__version__") = "0.1.0";
    m.attr("version_string") = kVersionString;

    // --- errors: base first so the later (derived) translators win ---------
    auto base_exc = py::register_exception<Error>(m, "PomdpError", PyExc_RuntimeError);
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base_exc);
    py::register_exception<ValidationError>(m, "ValidationError", base_exc);
    py::register_exception<ParseError>(m, "ParseError", base_exc);
    py::register_exception<SizeOverflow>(m, "SizeOverflow", base_exc);
    py::register_exception<SearchSpaceTooLarge>(m, "SearchSpaceTooLarge", base_exc);
    py::register_exception<DegenerateObservation>(m, "DegenerateObservation", base_exc);
    py::register_exception<DegenerateHistory>(m, "DegenerateHistory", base_exc);
    py::register_exception<SolveFailure>(m, "SolveFailure", base_exc);
    py::register_exception<SupportMismatch>(m, "SupportMismatch", base_exc);
    py::register_exception<NotErgodic>(m, "NotErgodic", base_exc);
    py::register_exception<UnboundedRatio>(m, "UnboundedRatio", base_exc);

    // --- rng ----------------------------------------------------------------
    py::class_<RngStream>(m, "RngStream", "Seeded random stream; (seed, stream) pairs are independent")
        .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream") = 0)
        .def("uniform", &RngStream::uniform)
        .def("uniform_int", &RngStream::uniform_int, py::arg("n"))
        .def("discrete", py::overload_cast<const std::vector<double>&>(&RngStream::discrete), py::arg("probs"));

    // --- model ----------------------------------------------------------------
    py::class_<PomdpModel>(m, "PomdpModel",
                           "Finite tabular POMDP: transition P[x][u][x'], channel Phi[x][y], reward r[x][u]")
        .def(py::init<int, int, int, std::vector<double>, std::vector<double>, std::vector<double>, double, double,
                      std::string>(),
             py::arg("states"), py::arg("actions"), py::arg("observations"), py::arg("transition"),
             py::arg("channel"), py::arg("reward"), py::arg("gamma"), py::arg("r_max") = -1.0, py::arg("name") = "")
        .def_property_readonly("states", &PomdpModel::states)
        .def_property_readonly("actions", &PomdpModel::actions)
        .def_property_readonly("observations", &PomdpModel::observations)
        .def_property_readonly("gamma", &PomdpModel::gamma)
        .def_property_readonly("r_max", &PomdpModel::r_max)
        .def_property_readonly("name", &PomdpModel::name)
        .def("p", &PomdpModel::p, py::arg("x"), py::arg("u"), py::arg("x2"))
        .def("phi", &PomdpModel::phi, py::arg("x"), py::arg("y"))
        .def("r", &PomdpModel::r, py::arg("x"), py::arg("u"))
        .def_property_readonly("transition", &PomdpModel::transition)
        .def_property_readonly("channel", &PomdpModel::channel)
        .def_property_readonly("reward", &PomdpModel::reward)
        .def("fully_observed", &PomdpModel::fully_observed)
        .def("to_json_text", &PomdpModel::to_json_text)
        .def("save", &PomdpModel::save, py::arg("path"))
        .def_static("from_json_text", &PomdpModel::from_json_text, py::arg("text"))
        .def_static("load", &PomdpModel::load, py::arg("path"));
    m.def("two_state_noisy", &two_state_noisy, "The canonical two-state benchmark model");
    m.def("random_pomdp", &random_pomdp, py::arg("states"), py::arg("actions"), py::arg("observations"),
          py::arg("seed"), py::arg("gamma") = 0.9, "Random dense model with Dirichlet(1) rows");
    m.def("fully_observed", &fully_observed, py::arg("states"), py::arg("actions"), py::arg("transition"),
          py::arg("reward"), py::arg("gamma"), py::arg("name") = "fully_observed",
          "Fully observed wrapper: Y = X with an identity channel");

    // --- filter ---------------------------------------------------------------
    py::class_<Belief>(m, "Belief", "Probability vector over hidden states")
        .def(py::init<std::vector<double>, std::string>(), py::arg("probs"), py::arg("tag") = "")
        .def_readonly("probs", &Belief::probs)
        .def_readonly("provenance", &Belief::provenance)
        .def("__len__", &Belief::size)
        .def("__getitem__", [](const Belief& b, int x) {
            if (x < 0 || x >= b.size()) throw py::index_error();
            return b[x];
        })
        .def_static("point_mass", &Belief::point_mass, py::arg("x"), py::arg("n"), py::arg("tag") = "")
        .def_static("uniform", &Belief::uniform, py::arg("n"), py::arg("tag") = "");
    py::class_<History>(m, "History", "Realized record: (y0, z0), then observations y_1.. and actions u_0..")
        .def(py::init([](int y0, int z0, std::vector<int> observations, std::vector<int> actions) {
                 History h;
                 h.y0 = y0;
                 h.z0 = z0;
                 h.observations = std::move(observations);
                 h.actions = std::move(actions);
                 return h;
             }),
             py::arg("y0") = 0, py::arg("z0") = 0, py::arg("observations") = std::vector<int>{},
             py::arg("actions") = std::vector<int>{})
        .def_readwrite("y0", &History::y0)
        .def_readwrite("z0", &History::z0)
        .def_readwrite("observations", &History::observations)
        .def_readwrite("actions", &History::actions)
        .def("length", &History::length);
    m.def("filter_step", &filter_step, py::arg("b"), py::arg("y"), py::arg("u"), py::arg("model"),
          "One predict-update step of the exact Bayes filter");
    m.def("filter_n", &filter_n, py::arg("b0"), py::arg("ys"), py::arg("us"), py::arg("model"),
          "n-fold filter composition along aligned (y, u) sequences");
    m.def("observation_posterior", &observation_posterior, py::arg("prior"), py::arg("y"), py::arg("model"));
    m.def("belief_reward", &belief_reward, py::arg("b"), py::arg("u"), py::arg("model"));
    m.def("tv_distance", py::overload_cast<const std::vector<double>&, const std::vector<double>&>(&tv_distance),
          py::arg("p"), py::arg("q"), "Total-variation distance (half the l1 distance)");
    m.def("tv_distance", py::overload_cast<const Belief&, const Belief&>(&tv_distance), py::arg("p"), py::arg("q"));

    // --- controllers ------------------------------------------------------------
    py::class_<InternalStateSpec>(m, "InternalStateSpec", "Internal-state space Z with kernel phi(z'|z,y,u)")
        .def_static("sliding_block", &InternalStateSpec::sliding_block, py::arg("n"), py::arg("ny"), py::arg("nu"),
                    "Window of the last n (observation, action) pairs; n = 0 is reactive")
        .def_static("generic", &InternalStateSpec::generic, py::arg("nz"), py::arg("ny"), py::arg("nu"),
                    py::arg("kernel"))
        .def_property_readonly("size", &InternalStateSpec::size)
        .def_property_readonly("observations", &InternalStateSpec::observations)
        .def_property_readonly("actions", &InternalStateSpec::actions)
        .def_property_readonly("is_sliding_block", &InternalStateSpec::is_sliding_block)
        .def_property_readonly("block_length", [](const InternalStateSpec& s) -> std::optional<int> {
            return s.is_sliding_block() ? std::optional<int>(s.block_length()) : std::nullopt;
        })
        .def("kernel", &InternalStateSpec::kernel, py::arg("z"), py::arg("y"), py::arg("u"), py::arg("z2"))
        .def("internal_step", &InternalStateSpec::internal_step, py::arg("z"), py::arg("y"), py::arg("u"),
             py::arg("rng"))
        .def("step_deterministic", &InternalStateSpec::step_deterministic, py::arg("z"), py::arg("y"), py::arg("u"))
        .def("window_observations", &InternalStateSpec::window_observations, py::arg("z"))
        .def("window_actions", &InternalStateSpec::window_actions, py::arg("z"))
        .def("pack_window", &InternalStateSpec::pack_window, py::arg("ys"), py::arg("us"));
    py::class_<FeatureMap>(m, "FeatureMap", "Feature map psi(y,z,u) with unit-ball rows")
        .def_static("tabular", &FeatureMap::tabular, py::arg("ny"), py::arg("nz"), py::arg("nu"),
                    py::arg("cap") = 2000000LL)
        .def_static("custom", &FeatureMap::custom, py::arg("ny"), py::arg("nz"), py::arg("nu"), py::arg("dim"),
                    py::arg("rows"))
        .def_property_readonly("dim", &FeatureMap::dim)
        .def_property_readonly("observations", &FeatureMap::observations)
        .def_property_readonly("internal_states", &FeatureMap::internal_states)
        .def_property_readonly("actions", &FeatureMap::actions)
        .def_property_readonly("is_tabular", &FeatureMap::is_tabular)
        .def("triple_index", &FeatureMap::triple_index, py::arg("y"), py::arg("z"), py::arg("u"))
        .def("dot", &FeatureMap::dot, py::arg("v"), py::arg("y"), py::arg("z"), py::arg("u"));
    py::class_<PolicyTable>(m, "PolicyTable", "Plain conditional action table pi(u|y,z)")
        .def(py::init([](int ny, int nz, int nu, std::vector<double> probs) {
                 return PolicyTable{ny, nz, nu, std::move(probs)};
             }),
             py::arg("ny"), py::arg("nz"), py::arg("nu"), py::arg("probs"))
        .def_readwrite("ny", &PolicyTable::ny)
        .def_readwrite("nz", &PolicyTable::nz)
        .def_readwrite("nu", &PolicyTable::nu)
        .def_readwrite("probs", &PolicyTable::probs)
        .def("prob", &PolicyTable::prob, py::arg("y"), py::arg("z"), py::arg("u"))
        .def_static("uniform", &PolicyTable::uniform, py::arg("ny"), py::arg("nz"), py::arg("nu"))
        .def_static("deterministic", &PolicyTable::deterministic, py::arg("ny"), py::arg("nz"), py::arg("nu"),
                    py::arg("action_of"));
    py::class_<FscPolicy>(m, "FscPolicy", "Softmax-linear policy pi(u|y,z) over a finite-state controller")
        .def(py::init<InternalStateSpec, FeatureMap>(), py::arg("internal"), py::arg("features"))
        .def(py::init<InternalStateSpec, FeatureMap, Eigen::VectorXd>(), py::arg("internal"), py::arg("features"),
             py::arg("theta"))
        .def_property_readonly("internal", &FscPolicy::internal)
        .def_property_readonly("features", &FscPolicy::features)
        .def_property_readonly("theta", &FscPolicy::theta)
        .def("action_probs", &FscPolicy::action_probs, py::arg("y"), py::arg("z"))
        .def("action_prob", &FscPolicy::action_prob, py::arg("y"), py::arg("z"), py::arg("u"))
        .def("log_policy_gradient", &FscPolicy::log_policy_gradient, py::arg("y"), py::arg("z"), py::arg("u"))
        .def("sample_action", &FscPolicy::sample_action, py::arg("y"), py::arg("z"), py::arg("rng"))
        .def("table", &FscPolicy::table)
        .def("with_theta", &FscPolicy::with_theta, py::arg("theta"))
        .def("to_json_text", &FscPolicy::to_json_text)
        .def("save", &FscPolicy::save, py::arg("path"))
        .def_static("from_json_text", &FscPolicy::from_json_text, py::arg("text"))
        .def_static("load", &FscPolicy::load, py::arg("path"));
    m.def("tabular_theta_for", &tabular_theta_for, py::arg("target"), py::arg("features"),
          "theta reproducing a strictly positive table under tabular features");

    // --- warm start -------------------------------------------------------------
    py::class_<WarmStart>(m, "WarmStart", "Initial-history generator: exploration policy + hidden prior")
        .def(py::init<>())
        .def_readwrite("explore", &WarmStart::explore)
        .def_readwrite("theta", &WarmStart::theta)
        .def_readwrite("z_init", &WarmStart::z_init)
        .def_static("uniform", &WarmStart::uniform, py::arg("model"), py::arg("spec"))
        .def("validate", &WarmStart::validate, py::arg("model"), py::arg("spec"));
    py::class_<H0Sample>(m, "H0Sample")
        .def_readonly("x0", &H0Sample::x0)
        .def_readonly("y0", &H0Sample::y0)
        .def_readonly("z0", &H0Sample::z0)
        .def_readonly("b0", &H0Sample::b0);
    py::class_<InitialLaw>(m, "InitialLaw", "Exact law of (x0, y0, z0) plus conditional priors b0(.|y,z)")
        .def_readonly("nx", &InitialLaw::nx)
        .def_readonly("ny", &InitialLaw::ny)
        .def_readonly("nz", &InitialLaw::nz)
        .def_readonly("xi", &InitialLaw::xi)
        .def_readonly("joint", &InitialLaw::joint)
        .def_readonly("b0_table", &InitialLaw::b0_table)
        .def("xi_at", &InitialLaw::xi_at, py::arg("y"), py::arg("z"))
        .def("joint_at", &InitialLaw::joint_at, py::arg("x"), py::arg("y"), py::arg("z"))
        .def("b0", &InitialLaw::b0, py::arg("y"), py::arg("z"), py::arg("x"))
        .def("supported", &InitialLaw::supported, py::arg("y"), py::arg("z"))
        .def("has_prior", &InitialLaw::has_prior, py::arg("y"), py::arg("z"))
        .def("b0_belief", &InitialLaw::b0_belief, py::arg("y"), py::arg("z"));
    m.def("sample_h0", &sample_h0, py::arg("warm"), py::arg("spec"), py::arg("model"), py::arg("rng"));
    m.def("enumerate_initial", &enumerate_initial, py::arg("warm"), py::arg("spec"), py::arg("model"));

    // --- sampling ---------------------------------------------------------------
    py::class_<TrajectoryRecord>(m, "TrajectoryRecord", "k-step rollout with the exact filter tracked alongside")
        .def_readonly("xs", &TrajectoryRecord::xs)
        .def_readonly("ys", &TrajectoryRecord::ys)
        .def_readonly("zs", &TrajectoryRecord::zs)
        .def_readonly("us", &TrajectoryRecord::us)
        .def_readonly("rewards", &TrajectoryRecord::rewards)
        .def_readonly("beliefs", &TrajectoryRecord::beliefs)
        .def("steps", &TrajectoryRecord::steps)
        .def("discounted_reward", &TrajectoryRecord::discounted_reward, py::arg("gamma"));
    py::class_<RolloutStart>(m, "RolloutStart")
        .def(py::init([](int x0, int y0, int z0, Belief b0) {
                 RolloutStart s;
                 s.x0 = x0;
                 s.y0 = y0;
                 s.z0 = z0;
                 s.b0 = std::move(b0);
                 return s;
             }),
             py::arg("x0"), py::arg("y0"), py::arg("z0"), py::arg("b0"))
        .def_readwrite("x0", &RolloutStart::x0)
        .def_readwrite("y0", &RolloutStart::y0)
        .def_readwrite("z0", &RolloutStart::z0)
        .def_readwrite("b0", &RolloutStart::b0);
    m.def("rollout", &rollout, py::arg("policy"), py::arg("model"), py::arg("start"), py::arg("m"), py::arg("rng"),
          py::arg("track_beliefs") = true);
    py::class_<VisitationSample>(m, "VisitationSample")
        .def_readonly("y", &VisitationSample::y)
        .def_readonly("z", &VisitationSample::z)
        .def_readonly("x", &VisitationSample::x)
        .def_readonly("horizon", &VisitationSample::horizon)
        .def_readonly("belief", &VisitationSample::belief);
    m.def("sample_visitation", &sample_visitation, py::arg("policy"), py::arg("model"), py::arg("warm"),
          py::arg("rng"), py::arg("track_beliefs") = true,
          "One draw from the discounted visitation d_xi^pi");

    // --- critic -----------------------------------------------------------------
    py::class_<CriticConfig>(m, "CriticConfig")
        .def(py::init<>())
        .def_readwrite("m", &CriticConfig::m)
        .def_readwrite("K", &CriticConfig::K)
        .def_readwrite("alpha", &CriticConfig::alpha)
        .def_readwrite("R", &CriticConfig::R)
        .def("alpha_or_default", &CriticConfig::alpha_or_default)
        .def("validate", &CriticConfig::validate);
    py::class_<CriticEstimate>(m, "CriticEstimate")
        .def_readonly("beta_avg", &CriticEstimate::beta_avg)
        .def_readonly("beta_final", &CriticEstimate::beta_final)
        .def_readonly("M_const", &CriticEstimate::M_const);
    m.def("project_ball", &project_ball, py::arg("v"), py::arg("R"));
    m.def("run_mstep_td", &run_mstep_td, py::arg("policy"), py::arg("model"), py::arg("config"), py::arg("warm"),
          py::arg("rng"), py::arg("observer") = py::none(),
          "K iterations of projected m-step TD; returns the iterate average and final iterate");
    py::class_<DerivedValues>(m, "DerivedValues", "Q/V/A evaluators induced by a critic parameter vector")
        .def(py::init<Eigen::VectorXd, const FscPolicy&>(), py::arg("beta"), py::arg("policy"),
             py::keep_alive<1, 3>())
        .def("q", &DerivedValues::q, py::arg("y"), py::arg("z"), py::arg("u"))
        .def("v", &DerivedValues::v, py::arg("y"), py::arg("z"))
        .def("a", &DerivedValues::a, py::arg("y"), py::arg("z"), py::arg("u"));

    // --- actor ------------------------------------------------------------------
    py::class_<ActorConfig>(m, "ActorConfig")
        .def(py::init<>())
        .def_readwrite("T", &ActorConfig::T)
        .def_readwrite("N", &ActorConfig::N)
        .def_readwrite("eta", &ActorConfig::eta)
        .def_readwrite("zeta", &ActorConfig::zeta)
        .def_readwrite("R", &ActorConfig::R)
        .def("eta_or_default", &ActorConfig::eta_or_default)
        .def("zeta_or_default", &ActorConfig::zeta_or_default, py::arg("gamma"), py::arg("r_max"))
        .def("validate", &ActorConfig::validate);
    m.def("cfa_loss_gradient", &cfa_loss_gradient, py::arg("w"), py::arg("y"), py::arg("z"), py::arg("u"),
          py::arg("policy"), py::arg("advantage"));
    m.def("nac_update", &nac_update, py::arg("theta"), py::arg("w_bar"), py::arg("eta"));
    m.def("kl_potential", &kl_potential, py::arg("pi_ref"), py::arg("pi"), py::arg("d_ref"),
          "Weighted KL divergence of the reference policy from pi");
    py::class_<NacIterationRecord>(m, "NacIterationRecord")
        .def_readonly("t", &NacIterationRecord::t)
        .def_readonly("V_hat", &NacIterationRecord::V_hat)
        .def_readonly("V_oracle", &NacIterationRecord::V_oracle)
        .def_readonly("sgd_loss_mean", &NacIterationRecord::sgd_loss_mean)
        .def_readonly("w_norm", &NacIterationRecord::w_norm)
        .def_readonly("kl_potential", &NacIterationRecord::kl_potential)
        .def_readonly("beta_norm", &NacIterationRecord::beta_norm)
        .def_readonly("seconds", &NacIterationRecord::seconds);
    py::class_<NacRunLog>(m, "NacRunLog")
        .def_readonly("iterations", &NacRunLog::iterations)
        .def_readonly("best_t", &NacRunLog::best_t)
        .def_readonly("final_V_oracle", &NacRunLog::final_V_oracle);
    py::class_<NacOracleHooks>(m, "NacOracleHooks", "Optional exact-solver hooks for the training loop")
        .def(py::init<>())
        .def_readwrite("exact_value", &NacOracleHooks::exact_value)
        .def_readwrite("kl_reference", &NacOracleHooks::kl_reference)
        .def_readwrite("kl_weights", &NacOracleHooks::kl_weights)
        .def_readwrite("exact_advantage", &NacOracleHooks::exact_advantage);
    py::class_<NacResult>(m, "NacResult")
        .def_readonly("final_policy", &NacResult::final_policy)
        .def_readonly("best_policy", &NacResult::best_policy)
        .def_readonly("log", &NacResult::log);
    m.def("run_nac", &run_nac, py::arg("model"), py::arg("internal"), py::arg("actor_cfg"), py::arg("critic_cfg"),
          py::arg("warm"), py::arg("rng"), py::arg("hooks") = NacOracleHooks{},
          "The full natural actor-critic loop");

    // --- oracle -----------------------------------------------------------------
    m.def("default_horizon", &default_horizon, py::arg("gamma"),
          "Smallest H with discounted tail gamma^H/(1-gamma) <= 1e-8");
    py::class_<QTable>(m, "QTable", "Value table over (y,z,u) with a definedness mask")
        .def_readonly("ny", &QTable::ny)
        .def_readonly("nz", &QTable::nz)
        .def_readonly("nu", &QTable::nu)
        .def_readonly("q", &QTable::q)
        .def("at", &QTable::at, py::arg("y"), py::arg("z"), py::arg("u"))
        .def("defined", &QTable::defined, py::arg("y"), py::arg("z"))
        .def("max_abs_diff", &QTable::max_abs_diff, py::arg("other"));
    py::class_<OracleEvaluation>(m, "OracleEvaluation", "Exact policy evaluation on the joint chain")
        .def_readonly("q", &OracleEvaluation::q)
        .def_readonly("q0", &OracleEvaluation::q0)
        .def_readonly("v0", &OracleEvaluation::v0)
        .def_readonly("v", &OracleEvaluation::v)
        .def_readonly("value_at_xi", &OracleEvaluation::value_at_xi)
        .def("a", &OracleEvaluation::a, py::arg("y"), py::arg("z"), py::arg("u"));
    m.def("exact_q", &exact_q, py::arg("pi"), py::arg("spec"), py::arg("model"), py::arg("law"));
    py::class_<VisitationReport>(m, "VisitationReport")
        .def_readonly("ny", &VisitationReport::ny)
        .def_readonly("nz", &VisitationReport::nz)
        .def_readonly("nu", &VisitationReport::nu)
        .def_readonly("d", &VisitationReport::d)
        .def_readonly("d_pi", &VisitationReport::d_pi)
        .def_readonly("tilde_d", &VisitationReport::tilde_d)
        .def_readonly("tilde_d_pi", &VisitationReport::tilde_d_pi)
        .def_readonly("tv_shift", &VisitationReport::tv_shift)
        .def_readonly("m", &VisitationReport::m);
    m.def("exact_visitation", &exact_visitation, py::arg("pi"), py::arg("spec"), py::arg("model"), py::arg("law"),
          py::arg("m"));
    py::class_<FixedPointReport>(m, "FixedPointReport")
        .def_readonly("q_star", &FixedPointReport::q_star)
        .def_readonly("residual_inf", &FixedPointReport::residual_inf)
        .def_readonly("m", &FixedPointReport::m);
    m.def("fixed_point_q", &fixed_point_q, py::arg("pi"), py::arg("spec"), py::arg("model"), py::arg("law"),
          py::arg("m"), "The m-step TD fixed point Q = R_m + gamma^m P_m Q");
    py::class_<LinearFit>(m, "LinearFit")
        .def_readonly("beta", &LinearFit::beta)
        .def_readonly("error", &LinearFit::error);
    m.def("best_linear_fit", &best_linear_fit, py::arg("q"), py::arg("weights"), py::arg("features"), py::arg("R"));
    py::class_<EpsPaReport>(m, "EpsPaReport", "Two-summand perceptual-aliasing error estimate")
        .def_readonly("first", &EpsPaReport::first)
        .def_readonly("second", &EpsPaReport::second)
        .def_readonly("total", &EpsPaReport::total)
        .def_readonly("tv_shift", &EpsPaReport::tv_shift)
        .def_readonly("tail_bound", &EpsPaReport::tail_bound)
        .def_readonly("outer_terms", &EpsPaReport::outer_terms)
        .def_readonly("samples_per_triple", &EpsPaReport::samples_per_triple)
        .def_readonly("g_table", &EpsPaReport::g_table);
    m.def("eps_pa", &eps_pa, py::arg("pi"), py::arg("spec"), py::arg("model"), py::arg("law"), py::arg("m"),
          py::arg("R"), py::arg("rng"), py::arg("samples_per_triple") = 2000LL);
    py::class_<InferenceReport>(m, "InferenceReport", "Monte Carlo inference error Gamma^pi(xi)")
        .def_readonly("estimate", &InferenceReport::estimate)
        .def_readonly("std_error", &InferenceReport::std_error)
        .def_readonly("tail_bound", &InferenceReport::tail_bound)
        .def_readonly("horizon", &InferenceReport::horizon)
        .def_readonly("samples", &InferenceReport::samples);
    m.def("inference_error", &inference_error, py::arg("pi"), py::arg("spec"), py::arg("model"), py::arg("warm"),
          py::arg("horizon"), py::arg("samples"), py::arg("rng"));
    m.def("concentrability", &concentrability, py::arg("d_pi_current"), py::arg("d_pi_star"));
    py::class_<PdlReport>(m, "PdlReport", "Performance-difference check between two controllers")
        .def_readonly("lhs", &PdlReport::lhs)
        .def_readonly("advantage_term", &PdlReport::advantage_term)
        .def_readonly("gamma_prime", &PdlReport::gamma_prime)
        .def_readonly("rhs_conservative", &PdlReport::rhs_conservative)
        .def_readonly("holds", &PdlReport::holds);
    m.def("pdl_check", &pdl_check, py::arg("pi_prime"), py::arg("pi"), py::arg("spec"), py::arg("model"),
          py::arg("warm"), py::arg("horizon"), py::arg("samples"), py::arg("rng"));
    py::class_<BruteForceResult>(m, "BruteForceResult")
        .def_readonly("best", &BruteForceResult::best)
        .def_readonly("value", &BruteForceResult::value)
        .def_readonly("searched", &BruteForceResult::searched);
    m.def("best_fsc_bruteforce", &best_fsc_bruteforce, py::arg("spec"), py::arg("model"), py::arg("law"),
          py::arg("cap") = 1000000LL, "Exhaustive search over deterministic controller tables");
    m.def("compatible_fa_error", &compatible_fa_error, py::arg("pi"), py::arg("spec"), py::arg("model"),
          py::arg("law"), py::arg("features"), py::arg("R"));
    py::class_<MdpSolution>(m, "MdpSolution")
        .def_readonly("v", &MdpSolution::v)
        .def_readonly("greedy", &MdpSolution::greedy)
        .def_readonly("iterations", &MdpSolution::iterations);
    m.def("mdp_value_iteration", &mdp_value_iteration, py::arg("model"), py::arg("tol") = 1e-12,
          py::arg("max_iter") = 100000);
    py::class_<ErrorReport>(m, "ErrorReport", "Every error term of the learning bounds for one policy")
        .def_readonly("value_at_xi", &ErrorReport::value_at_xi)
        .def_readonly("fixed_point_gap_inf", &ErrorReport::fixed_point_gap_inf)
        .def_readonly("projection", &ErrorReport::projection)
        .def_readonly("eps_pa", &ErrorReport::eps_pa)
        .def_readonly("gamma_inference", &ErrorReport::gamma_inference)
        .def_readonly("concentrability_vs_ref", &ErrorReport::concentrability_vs_ref)
        .def_readonly("critic_M_const", &ErrorReport::critic_M_const)
        .def_readonly("m", &ErrorReport::m);
    m.def(
        "build_error_report",
        [](const PolicyTable& pi, const InternalStateSpec& spec, const PomdpModel& model, const WarmStart& warm,
           int mm, double R, const FeatureMap& features, RngStream& rng, const std::optional<PolicyTable>& reference,
           const std::optional<InternalStateSpec>& reference_spec) {
            return build_error_report(pi, spec, model, warm, mm, R, features, rng,
                                      reference ? &*reference : nullptr,
                                      reference_spec ? &*reference_spec : nullptr);
        },
        py::arg("pi"), py::arg("spec"), py::arg("model"), py::arg("warm"), py::arg("m"), py::arg("R"),
        py::arg("features"), py::arg("rng"), py::arg("reference") = std::nullopt,
        py::arg("reference_spec") = std::nullopt);

    // --- stability --------------------------------------------------------------
    py::enum_<CertifiedCondition>(m, "CertifiedCondition")
        .value("cond2", CertifiedCondition::cond2)
        .value("cond3", CertifiedCondition::cond3)
        .value("none", CertifiedCondition::none);
    py::class_<ErgodicityCertificate>(m, "ErgodicityCertificate", "Verified filter-stability certificate")
        .def(py::init<>())
        .def_readwrite("alpha", &ErgodicityCertificate::alpha)
        .def_readwrite("mu_bar", &ErgodicityCertificate::mu_bar)
        .def_readwrite("eps0", &ErgodicityCertificate::eps0)
        .def_readwrite("m0", &ErgodicityCertificate::m0)
        .def_readwrite("nu", &ErgodicityCertificate::nu)
        .def_readwrite("which", &ErgodicityCertificate::which)
        .def("contraction_factor", &ErgodicityCertificate::contraction_factor)
        .def("envelope", &ErgodicityCertificate::envelope, py::arg("n"));
    py::class_<Condition1Result>(m, "Condition1Result")
        .def_readonly("alpha", &Condition1Result::alpha)
        .def_readonly("mu_bar", &Condition1Result::mu_bar);
    m.def("check_condition1", &check_condition1, py::arg("pi"),
          "Best persistence-of-excitation constant over the candidate reference measures");
    py::class_<Condition2Result>(m, "Condition2Result")
        .def_readonly("eps0", &Condition2Result::eps0)
        .def_readonly("nu", &Condition2Result::nu)
        .def_readonly("m0", &Condition2Result::m0);
    m.def("check_condition2", &check_condition2, py::arg("model"), py::arg("mu_bar"), py::arg("m0"));
    py::class_<Condition3Result>(m, "Condition3Result")
        .def_readonly("eps0", &Condition3Result::eps0)
        .def_readonly("upsilon", &Condition3Result::upsilon)
        .def_readonly("m0", &Condition3Result::m0);
    m.def("check_condition3", &check_condition3, py::arg("pi"), py::arg("model"), py::arg("internal"), py::arg("m0"));
    m.def("certify", &certify, py::arg("pi"), py::arg("model"), py::arg("internal"), py::arg("m0"),
          "Certificate via hidden-chain minorization, falling back to the joint chain");
    py::class_<BackwardVariables>(m, "BackwardVariables")
        .def_readonly("horizon", &BackwardVariables::horizon)
        .def_readonly("beta", &BackwardVariables::beta);
    m.def("backward_variables", &backward_variables, py::arg("model"), py::arg("pi"), py::arg("internal"),
          py::arg("h"));
    py::class_<SmoothingKernel>(m, "SmoothingKernel", "One conditional m0-step smoothing kernel")
        .def_readonly("ell", &SmoothingKernel::ell)
        .def_readonly("kappa", &SmoothingKernel::kappa)
        .def_property_readonly("row_defined",
                               [](const SmoothingKernel& k) { return to_bool_vector(k.row_defined); });
    m.def("smoothing_kernels", &smoothing_kernels, py::arg("model"), py::arg("pi"), py::arg("internal"), py::arg("h"),
          py::arg("m0"));
    py::class_<MinorizationReport>(m, "MinorizationReport")
        .def_readonly("bound", &MinorizationReport::bound)
        .def_readonly("c", &MinorizationReport::c)
        .def_readonly("ok", &MinorizationReport::ok);
    m.def("verify_kernel_minorization", &verify_kernel_minorization, py::arg("kernels"), py::arg("cert"));
    py::class_<ContractionCurve>(m, "ContractionCurve", "Empirical filter-stability curve")
        .def_readonly("ns", &ContractionCurve::ns)
        .def_readonly("tv_mean", &ContractionCurve::tv_mean)
        .def_readonly("tv_max", &ContractionCurve::tv_max)
        .def_readonly("envelope", &ContractionCurve::envelope)
        .def_readonly("has_envelope", &ContractionCurve::has_envelope)
        .def_readonly("samples", &ContractionCurve::samples)
        .def_readonly("violations_nonexpansion", &ContractionCurve::violations_nonexpansion)
        .def_readonly("violations_envelope", &ContractionCurve::violations_envelope)
        .def_readonly("violations_consistency", &ContractionCurve::violations_consistency);
    m.def(
        "contraction_experiment",
        [](const PomdpModel& model, const PolicyTable& pi, const InternalStateSpec& internal,
           const std::vector<int>& n_list, const Belief& v0, const Belief& v0_prime, int samples, RngStream& rng,
           const std::optional<ErgodicityCertificate>& cert) {
            return contraction_experiment(model, pi, internal, n_list, v0, v0_prime, samples, rng,
                                          cert ? &*cert : nullptr);
        },
        py::arg("model"), py::arg("pi"), py::arg("internal"), py::arg("n_list"), py::arg("v0"), py::arg("v0_prime"),
        py::arg("samples"), py::arg("rng"), py::arg("cert") = std::nullopt);
    m.def("left_multiply", &left_multiply, py::arg("v"), py::arg("K"),
          "(v K)(x) for a row-stochastic kernel K(i, j) = K(next = j | prev = i)");

    // --- harness ----------------------------------------------------------------
    py::class_<BenchmarkGenerator>(m, "BenchmarkGenerator")
        .def(py::init<>())
        .def_readwrite("kind", &BenchmarkGenerator::kind)
        .def_readwrite("states", &BenchmarkGenerator::states)
        .def_readwrite("actions", &BenchmarkGenerator::actions)
        .def_readwrite("observations", &BenchmarkGenerator::observations)
        .def_readwrite("seed", &BenchmarkGenerator::seed)
        .def_readwrite("gamma", &BenchmarkGenerator::gamma)
        .def_readwrite("transition", &BenchmarkGenerator::transition)
        .def_readwrite("reward", &BenchmarkGenerator::reward);
    m.def("generate_benchmark", &generate_benchmark, py::arg("spec"));
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("model_path", &ExperimentConfig::model_path)
        .def_readwrite("generator", &ExperimentConfig::generator)
        .def_readwrite("block_length", &ExperimentConfig::block_length)
        .def_readwrite("controller_path", &ExperimentConfig::controller_path)
        .def_readwrite("actor", &ExperimentConfig::actor)
        .def_readwrite("critic", &ExperimentConfig::critic)
        .def_readwrite("seeds", &ExperimentConfig::seeds)
        .def_readwrite("out_dir", &ExperimentConfig::out_dir)
        .def_readwrite("oracle", &ExperimentConfig::oracle)
        .def_readwrite("threads", &ExperimentConfig::threads)
        .def_readwrite("config_hash", &ExperimentConfig::config_hash);
    m.def("parse_config_text", &parse_config_text, py::arg("text"),
          "Strict-schema experiment config parse with full validation");
    m.def("load_config", &load_config, py::arg("path"));
    m.def("fnv1a_hash", &fnv1a_hash, py::arg("text"));
    m.def("load_internal_kernel", &load_internal_kernel, py::arg("path"));
    py::class_<ExperimentOutcome>(m, "ExperimentOutcome")
        .def_readonly("per_seed_files", &ExperimentOutcome::per_seed_files)
        .def_readonly("summary_file", &ExperimentOutcome::summary_file)
        .def_readonly("timing_file", &ExperimentOutcome::timing_file);
    m.def("run_experiment", &run_experiment, py::arg("config"),
          "Run the seed sweep and write per-seed CSVs, the merged summary, and timings");
    m.def("mc_value", &mc_value, py::arg("policy"), py::arg("model"), py::arg("warm"), py::arg("n_traj"),
          py::arg("rng"), "Monte Carlo estimate of V^pi(xi)");
    m.def("format_double", &format_double, py::arg("v"), "Shortest round-trip text for a double");
}
