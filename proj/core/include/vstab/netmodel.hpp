#pragma once

// Network data model, JSON network-file parsing, and bus admittance matrix
// assembly with the generator/load partition.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vstab/cnum.hpp"

namespace vstab {

using BusId = std::int64_t;

enum class BusKind { Generator, Load };

struct Bus {
    BusId id = 0;
    BusKind kind = BusKind::Load;
    /// Fixed complex voltage; set iff kind == Generator.
    std::optional<Complex> voltage;
    /// Complex power S = P + iQ drawn by the load; set iff kind == Load.
    std::optional<Complex> base_power;

    static Bus generator(BusId id, Complex v) { return {id, BusKind::Generator, v, std::nullopt}; }
    static Bus load(BusId id, Complex s) { return {id, BusKind::Load, std::nullopt, s}; }

    friend bool operator==(const Bus&, const Bus&) = default;
};

struct Branch {
    BusId from = 0;
    BusId to = 0;
    /// Series admittance of the line.
    Complex admittance;

    friend bool operator==(const Branch&, const Branch&) = default;
};

struct Shunt {
    BusId bus = 0;
    Complex admittance;

    friend bool operator==(const Shunt&, const Shunt&) = default;
};

/// Malformed JSON. `location` is "line L, column C" or a byte offset.
class ParseError : public std::runtime_error {
  public:
    ParseError(std::string location, const std::string& message)
        : std::runtime_error(location + ": " + message), location_(std::move(location)) {}
    [[nodiscard]] const std::string& location() const noexcept { return location_; }

  private:
    std::string location_;
};

/// Well-formed input that violates a network invariant. `location` is a JSON
/// pointer into the document (or into the element list for programmatic input).
class ValidationError : public std::runtime_error {
  public:
    ValidationError(std::string location, const std::string& message)
        : std::runtime_error(location + ": " + message), location_(std::move(location)) {}
    [[nodiscard]] const std::string& location() const noexcept { return location_; }

  private:
    std::string location_;
};

/// A validated network. Construction checks every invariant: unique bus ids,
/// known endpoints, kind-consistent fields, at least one generator, nonzero
/// admittances, and a connected branch graph.
class Network {
  public:
    Network(std::vector<Bus> buses, std::vector<Branch> branches, std::vector<Shunt> shunts);

    [[nodiscard]] const std::vector<Bus>& buses() const noexcept { return buses_; }
    [[nodiscard]] const std::vector<Branch>& branches() const noexcept { return branches_; }
    [[nodiscard]] const std::vector<Shunt>& shunts() const noexcept { return shunts_; }

    /// Position of `id` in buses(); throws std::out_of_range for unknown ids.
    [[nodiscard]] std::size_t position(BusId id) const;
    [[nodiscard]] const Bus& bus(BusId id) const { return buses_[position(id)]; }
    [[nodiscard]] bool contains(BusId id) const noexcept;

    /// Same topology with every load's base power multiplied by `scale`.
    [[nodiscard]] Network with_scaled_loads(double scale) const;
    /// Same network without any shunt elements.
    [[nodiscard]] Network without_shunts() const;

    friend bool operator==(const Network&, const Network&) = default;

  private:
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    std::vector<Shunt> shunts_;
};

/// Parses the JSON network format. Throws ParseError or ValidationError.
Network parse_network(std::string_view text);

/// Renders a network in the same JSON format parse_network accepts.
std::string serialize_network(const Network& net);

/// The built-in two-bus system: generator bus 1 at 1+0i, load bus 2 drawing
/// 0.2i, line admittance -3i, and (optionally) a shunt i at bus 1.
Network two_bus_counterexample(bool with_shunt = true);

/// Bus admittance matrix and its generator/load blocks. Block order is
/// generators first, then loads, each in network file order; `y` uses the same
/// order, so y == [[y_gg, y_gl], [y_lg, y_ll]].
struct AdmittancePartition {
    ComplexMatrix y;
    ComplexMatrix y_gg;
    ComplexMatrix y_gl;
    ComplexMatrix y_lg;
    ComplexMatrix y_ll;
    std::vector<BusId> gen_index;
    std::vector<BusId> load_index;

    [[nodiscard]] std::size_t n_gen() const noexcept { return gen_index.size(); }
    [[nodiscard]] std::size_t n_load() const noexcept { return load_index.size(); }
    [[nodiscard]] std::size_t n_bus() const noexcept { return gen_index.size() + load_index.size(); }
    /// Bus ids in partition order (generators, then loads).
    [[nodiscard]] std::vector<BusId> order() const;
};

AdmittancePartition build_ybus(const Network& net);

struct InvertibilityCheck {
    bool invertible = false;
    double pivot_ratio = 0.0;
};

/// LU with partial pivoting; invertible iff pivot ratio > tol::kPivot.
InvertibilityCheck invertibility_check(const ComplexMatrix& y);

}  // namespace vstab
