#include "vstab/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "json.hpp"

namespace vstab {

namespace {

using nlohmann::json;

std::string pointer(std::string_view list, std::size_t index, std::string_view field = {}) {
    std::string p = "/" + std::string(list) + "/" + std::to_string(index);
    if (!field.empty()) p += "/" + std::string(field);
    return p;
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

class DisjointSets {
  public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

  private:
    std::vector<std::size_t> parent_;
};

}  // namespace

// --- Network -----------------------------------------------------------------

Network::Network(std::vector<Bus> buses, std::vector<Branch> branches, std::vector<Shunt> shunts)
    : buses_(std::move(buses)), branches_(std::move(branches)), shunts_(std::move(shunts)) {
    if (buses_.empty()) throw ValidationError("/buses", "network has no buses");

    std::unordered_map<BusId, std::size_t> seen;
    bool has_generator = false;
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        const Bus& b = buses_[i];
        if (b.id < 0) throw ValidationError(pointer("buses", i, "id"), "bus id must be >= 0");
        if (!seen.emplace(b.id, i).second) {
            throw ValidationError(pointer("buses", i, "id"), "duplicate bus id " + std::to_string(b.id));
        }
        if (b.kind == BusKind::Generator) {
            has_generator = true;
            if (!b.voltage) throw ValidationError(pointer("buses", i, "voltage"), "generator bus requires a voltage");
            if (b.base_power) throw ValidationError(pointer("buses", i, "power"), "generator bus cannot carry a load power");
            if (!finite(*b.voltage) || std::abs(*b.voltage) <= 0.0) {
                throw ValidationError(pointer("buses", i, "voltage"), "generator voltage magnitude must be positive");
            }
        } else {
            if (!b.base_power) throw ValidationError(pointer("buses", i, "power"), "load bus requires a power");
            if (b.voltage) throw ValidationError(pointer("buses", i, "voltage"), "load bus cannot carry a fixed voltage");
            if (!finite(*b.base_power)) throw ValidationError(pointer("buses", i, "power"), "load power must be finite");
        }
    }
    if (!has_generator) throw ValidationError("/buses", "network needs at least one generator bus");

    DisjointSets components(buses_.size());
    for (std::size_t k = 0; k < branches_.size(); ++k) {
        const Branch& br = branches_[k];
        const auto from = seen.find(br.from);
        if (from == seen.end()) throw ValidationError(pointer("branches", k, "from"), "unknown bus " + std::to_string(br.from));
        const auto to = seen.find(br.to);
        if (to == seen.end()) throw ValidationError(pointer("branches", k, "to"), "unknown bus " + std::to_string(br.to));
        if (br.from == br.to) throw ValidationError(pointer("branches", k), "branch endpoints must differ");
        if (br.admittance == Complex{} || !finite(br.admittance)) {
            throw ValidationError(pointer("branches", k, "admittance"), "branch admittance must be finite and nonzero");
        }
        components.unite(from->second, to->second);
    }
    for (std::size_t k = 0; k < shunts_.size(); ++k) {
        const Shunt& sh = shunts_[k];
        if (!seen.contains(sh.bus)) throw ValidationError(pointer("shunts", k, "bus"), "unknown bus " + std::to_string(sh.bus));
        if (sh.admittance == Complex{} || !finite(sh.admittance)) {
            throw ValidationError(pointer("shunts", k, "admittance"), "shunt admittance must be finite and nonzero");
        }
    }
    const std::size_t root = components.find(0);
    for (std::size_t i = 1; i < buses_.size(); ++i) {
        if (components.find(i) != root) {
            throw ValidationError(pointer("buses", i), "network is disconnected: bus " + std::to_string(buses_[i].id) +
                                                           " is not reachable from bus " + std::to_string(buses_[0].id));
        }
    }
}

std::size_t Network::position(BusId id) const {
    const auto it = std::find_if(buses_.begin(), buses_.end(), [id](const Bus& b) { return b.id == id; });
    if (it == buses_.end()) throw std::out_of_range("unknown bus " + std::to_string(id));
    return static_cast<std::size_t>(it - buses_.begin());
}

bool Network::contains(BusId id) const noexcept {
    return std::any_of(buses_.begin(), buses_.end(), [id](const Bus& b) { return b.id == id; });
}

Network Network::with_scaled_loads(double scale) const {
    auto buses = buses_;
    for (auto& b : buses)
        if (b.base_power) *b.base_power *= scale;
    return {std::move(buses), branches_, shunts_};
}

Network Network::without_shunts() const { return {buses_, branches_, {}}; }

// --- JSON format -------------------------------------------------------------

namespace {

void reject_unknown_fields(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ValidationError(where + "/" + key, "unknown field '" + key + "'");
        }
    }
}

const json& require_field(const json& obj, const std::string& where, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(where + "/" + key, std::string("missing required field '") + key + "'");
    return *it;
}

const json& require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where, "expected an object");
    return j;
}

BusId read_id(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ValidationError(where, "expected an integer bus id");
    if (j.is_number_unsigned()) {
        const auto u = j.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<BusId>::max())) throw ValidationError(where, "bus id out of range");
        return static_cast<BusId>(u);
    }
    return j.get<BusId>();
}

Complex read_complex(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ValidationError(where, "expected a complex number as [re, im]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json write_complex(Complex z) { return json::array({z.real(), z.imag()}); }

const json& optional_array(const json& doc, const char* key) {
    static const json empty = json::array();
    const auto it = doc.find(key);
    if (it == doc.end()) return empty;
    if (!it->is_array()) throw ValidationError(std::string("/") + key, "expected an array");
    return *it;
}

std::string line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Network parse_network(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // nlohmann reports the 1-based offset of the offending byte.
        const std::size_t at = e.byte == 0 ? 0 : e.byte - 1;
        std::string msg = e.what();
        if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
        throw ParseError(line_column(text, at), msg);
    }

    require_object(doc, "");
    reject_unknown_fields(doc, "", {"buses", "branches", "shunts"});

    const json& jbuses = require_field(doc, "", "buses");
    if (!jbuses.is_array()) throw ValidationError("/buses", "expected an array");

    std::vector<Bus> buses;
    for (std::size_t i = 0; i < jbuses.size(); ++i) {
        const std::string where = pointer("buses", i);
        const json& jb = require_object(jbuses[i], where);
        reject_unknown_fields(jb, where, {"id", "kind", "voltage", "power"});
        Bus b;
        b.id = read_id(require_field(jb, where, "id"), where + "/id");
        const json& kind = require_field(jb, where, "kind");
        if (kind == "generator") {
            b.kind = BusKind::Generator;
            b.voltage = read_complex(require_field(jb, where, "voltage"), where + "/voltage");
            if (jb.contains("power")) throw ValidationError(where + "/power", "generator bus cannot carry a load power");
        } else if (kind == "load") {
            b.kind = BusKind::Load;
            b.base_power = read_complex(require_field(jb, where, "power"), where + "/power");
            if (jb.contains("voltage")) throw ValidationError(where + "/voltage", "load bus cannot carry a fixed voltage");
        } else {
            throw ValidationError(where + "/kind", "kind must be \"generator\" or \"load\"");
        }
        buses.push_back(b);
    }

    std::vector<Branch> branches;
    const json& jbranches = optional_array(doc, "branches");
    for (std::size_t k = 0; k < jbranches.size(); ++k) {
        const std::string where = pointer("branches", k);
        const json& jb = require_object(jbranches[k], where);
        reject_unknown_fields(jb, where, {"from", "to", "admittance"});
        branches.push_back({read_id(require_field(jb, where, "from"), where + "/from"),
                            read_id(require_field(jb, where, "to"), where + "/to"),
                            read_complex(require_field(jb, where, "admittance"), where + "/admittance")});
    }

    std::vector<Shunt> shunts;
    const json& jshunts = optional_array(doc, "shunts");
    for (std::size_t k = 0; k < jshunts.size(); ++k) {
        const std::string where = pointer("shunts", k);
        const json& js = require_object(jshunts[k], where);
        reject_unknown_fields(js, where, {"bus", "admittance"});
        shunts.push_back({read_id(require_field(js, where, "bus"), where + "/bus"),
                          read_complex(require_field(js, where, "admittance"), where + "/admittance")});
    }

    return {std::move(buses), std::move(branches), std::move(shunts)};
}

std::string serialize_network(const Network& net) {
    json buses = json::array();
    for (const auto& b : net.buses()) {
        json jb = json::object();
        jb["id"] = b.id;
        if (b.kind == BusKind::Generator) {
            jb["kind"] = "generator";
            jb["voltage"] = write_complex(*b.voltage);
        } else {
            jb["kind"] = "load";
            jb["power"] = write_complex(*b.base_power);
        }
        buses.push_back(std::move(jb));
    }
    json branches = json::array();
    for (const auto& br : net.branches()) {
        branches.push_back({{"from", br.from}, {"to", br.to}, {"admittance", write_complex(br.admittance)}});
    }
    json shunts = json::array();
    for (const auto& sh : net.shunts()) {
        shunts.push_back({{"bus", sh.bus}, {"admittance", write_complex(sh.admittance)}});
    }
    json doc = json::object();
    doc["buses"] = std::move(buses);
    doc["branches"] = std::move(branches);
    doc["shunts"] = std::move(shunts);
    return doc.dump(2) + "\n";
}

Network two_bus_counterexample(bool with_shunt) {
    std::vector<Shunt> shunts;
    if (with_shunt) shunts.push_back({1, Complex{0.0, 1.0}});
    return {{Bus::generator(1, {1.0, 0.0}), Bus::load(2, {0.0, 0.2})}, {{1, 2, Complex{0.0, -3.0}}}, std::move(shunts)};
}

// --- Admittance matrix -------------------------------------------------------

std::vector<BusId> AdmittancePartition::order() const {
    std::vector<BusId> ids = gen_index;
    ids.insert(ids.end(), load_index.begin(), load_index.end());
    return ids;
}

AdmittancePartition build_ybus(const Network& net) {
    AdmittancePartition part;
    for (const auto& b : net.buses()) {
        (b.kind == BusKind::Generator ? part.gen_index : part.load_index).push_back(b.id);
    }
    const auto ids = part.order();
    std::unordered_map<BusId, std::size_t> slot;
    for (std::size_t k = 0; k < ids.size(); ++k) slot[ids[k]] = k;

    const std::size_t n = ids.size();
    ComplexMatrix y(n, n);
    for (const auto& br : net.branches()) {
        const std::size_t i = slot.at(br.from);
        const std::size_t j = slot.at(br.to);
        y(i, i) += br.admittance;
        y(j, j) += br.admittance;
        y(i, j) -= br.admittance;
        y(j, i) -= br.admittance;
    }
    for (const auto& sh : net.shunts()) {
        const std::size_t i = slot.at(sh.bus);
        y(i, i) += sh.admittance;
    }

    const std::size_t ng = part.n_gen();
    const std::size_t nl = part.n_load();
    part.y_gg = ComplexMatrix(ng, ng);
    part.y_gl = ComplexMatrix(ng, nl);
    part.y_lg = ComplexMatrix(nl, ng);
    part.y_ll = ComplexMatrix(nl, nl);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const Complex v = y(r, c);
            if (r < ng && c < ng) part.y_gg(r, c) = v;
            else if (r < ng) part.y_gl(r, c - ng) = v;
            else if (c < ng) part.y_lg(r - ng, c) = v;
            else part.y_ll(r - ng, c - ng) = v;
        }
    }
    part.y = std::move(y);
    return part;
}

InvertibilityCheck invertibility_check(const ComplexMatrix& y) {
    if (!y.square()) throw DimensionError("invertibility_check: matrix is not square");
    const LuFactorization lu(y);
    return {lu.ok(), lu.pivot_ratio()};
}

}  // namespace vstab
