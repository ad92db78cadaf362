#pragma once
#include <stdexcept>
#include <string>

namespace ak {

// Base for every library failure; category() is the machine-readable tag the CLI prints.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& what)
        : std::runtime_error(what), category_(std::move(category)) {}
    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

struct InvalidModel : Error {
    explicit InvalidModel(const std::string& w) : Error("invalid_model", w) {}
};
struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error("domain", w) {}
};
struct AccuracyError : Error {
    explicit AccuracyError(const std::string& w) : Error("accuracy", w) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error("config", w) {}
};
struct NonIntegrableCF : Error {
    explicit NonIntegrableCF(const std::string& w) : Error("non_integrable_cf", w) {}
};
// t = tau: the law is a point mass at the start state.
struct DegenerateLaw : Error {
    explicit DegenerateLaw(const std::string& w) : Error("degenerate_law", w) {}
};

// Moment explosion: Riccati solution leaves every bounded set at t_star.
struct Explosion : Error {
    Explosion(double t_star, const std::string& w) : Error("explosion", w), t_star(t_star) {}
    double t_star;
};

// Omega = 0 or similar removable-looking but genuine singularity.
struct Singularity : Error {
    Singularity(double where, const std::string& w) : Error("singularity", w), location(where) {}
    double location;
};

} // namespace ak
