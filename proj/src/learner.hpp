#ifndef BBMH_LEARNER_HPP
#define BBMH_LEARNER_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dataio.hpp"

namespace bbmh {

enum class Loss : uint8_t { Hinge = 0, Logistic = 1 };

struct TrainConfig {
    Loss loss = Loss::Hinge;
    std::optional<double> lambda;  // unset -> 1 / (n * C)
    double C = 1.0;
    uint32_t epochs = 1;
    double eta0 = 0;  // 0 -> calibrate on a subset
    bool averaging = false;
    uint32_t avg_start_epoch = 2;
    bool shuffle = false;
    uint64_t seed = 0;
    uint64_t calibration_size = 1000;
    uint64_t max_dim = uint64_t(1) << 28;  // guard against misconfiguration
    std::optional<uint64_t> dim_override;  // for headerless text inputs
};

struct LinearModel {
    uint64_t dim = 0;
    Loss loss = Loss::Hinge;
    bool averaging = false;
    std::vector<double> w;
    std::vector<double> w_avg;  // present when averaging
    uint64_t updates = 0;

    const std::vector<double>& decision_weights() const { return averaging ? w_avg : w; }
};

struct EpochMetrics {
    uint32_t epoch = 0;
    double train_obj = 0;  // running per-example loss + final regularizer
    double test_acc = std::numeric_limits<double>::quiet_NaN();
    double load_seconds = 0;
    double update_seconds = 0;
};

// Eq-13-style SGD with the scaled-weight representation so per-example cost
// is O(nnz); averaging uses a linear combination of the two stored vectors.
class SgdTrainer {
public:
    SgdTrainer(uint64_t dim, Loss loss, double lambda, double eta0);

    // one online update; y = row.label, eta_t from the schedule.
    // Returns the pre-update margin y * w x.
    double step(const SparseRow& row);

    void start_averaging();
    bool averaging() const { return avg_on_; }
    uint64_t updates() const { return t_; }
    double eta_now() const;

    std::vector<double> weights() const;           // materialized w
    std::vector<double> averaged_weights() const;  // materialized running average

    LinearModel finish(bool averaging) const;

private:
    void renormalize();

    uint64_t dim_;
    Loss loss_;
    double lambda_;
    double eta0_;
    std::vector<double> u_;     // w = s * u
    double s_ = 1.0;
    std::vector<double> ubar_;  // w_avg = p * ubar + q * u
    double p_ = 1.0, q_ = 0.0;
    bool avg_on_ = false;
    uint64_t avg_n_ = 0;
    uint64_t t_ = 0;
};

double dot(const std::vector<double>& w, const SparseRow& row);

// (lambda/2)|w|^2 + mean loss over rows
double objective(const std::vector<double>& w, const std::vector<SparseRow>& rows, Loss loss,
                 double lambda);

// per-example loss gradient wrt w restricted to the row support; test hook
// for the finite-difference check
void loss_gradient(const std::vector<double>& w, const SparseRow& row, Loss loss,
                   std::vector<double>& grad_out);

// eta0 grid search: one pass over `rows` per candidate, smallest objective wins
double calibrate_eta0(const std::vector<SparseRow>& rows, uint64_t dim, Loss loss, double lambda,
                      uint64_t seed);

// Row stream the trainer replays once per epoch.
class RowSource {
public:
    virtual ~RowSource() = default;
    virtual bool next(SparseRow& out) = 0;
    virtual void reset() = 0;
    virtual uint64_t dim() const = 0;  // 0 = unknown (plain LibSVM text)
    virtual uint64_t count() const = 0;  // 0 = unknown
};

// path may hold a BBMH sketch (rows are runtime expansions, empty-set records
// skipped), a BBCV corpus, or LibSVM text
std::unique_ptr<RowSource> open_rows(const std::string& path);

struct TrainResult {
    LinearModel model;
    std::vector<EpochMetrics> metrics;
    double eta0 = 0;
    double lambda = 0;
    uint64_t n = 0;
};

TrainResult train(RowSource& data, const TrainConfig& cfg, RowSource* test_data);

double predict_score(const LinearModel& model, const SparseRow& row);
int predict_class(const LinearModel& model, const SparseRow& row);  // ties -> +1

struct PredictStats {
    uint64_t n = 0;
    uint64_t correct = 0;
    double accuracy() const { return n ? double(correct) / double(n) : 0.0; }
};

PredictStats predict_file(const LinearModel& model, RowSource& data, FILE* scores_out);

void save_model(const LinearModel& model, const std::string& path);
LinearModel load_model(const std::string& path);

}  // namespace bbmh

#endif
