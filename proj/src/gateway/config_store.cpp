#include "probesense/gateway/config_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "probesense/core/errors.hpp"

namespace probesense::gateway {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Role r) {
    switch (r) {
        case Role::User: return "User";
        case Role::Admin: return "Admin";
        case Role::SuperAdmin: return "SuperAdmin";
    }
    return "?";
}

std::optional<Role> parse_role(std::string_view text) {
    if (text == "User") return Role::User;
    if (text == "Admin") return Role::Admin;
    if (text == "SuperAdmin") return Role::SuperAdmin;
    return std::nullopt;
}

json to_json(const Entity& e) {
    json users = json::array();
    for (const auto& u : e.users) users.push_back({{"user_id", u.user_id}, {"role", to_string(u.role)}});
    return {{"id", e.id}, {"name", e.name}, {"users", users}};
}

json to_json(const Building& b) { return {{"id", b.id}, {"entity_id", b.entity_id}, {"name", b.name}}; }

json to_json(const Floor& f) {
    return {{"id", f.id},
            {"building_id", f.building_id},
            {"name", f.name},
            {"map_media_type", f.map_media_type},
            {"map_size", f.map_size},
            {"max_density", f.max_density}};
}

json to_json(const ScannerPlacement& p) {
    return {{"scanner_id", p.scanner_id}, {"floor_id", p.floor_id}, {"x", p.x}, {"y", p.y}};
}

namespace {

void check_name(const std::string& name) {
    if (name.empty()) throw ValidationError("name", "must not be empty");
}

void check_coordinates(double x, double y) {
    if (!std::isfinite(x) || x < 0 || x > 1) throw ValidationError("x", "must be in [0, 1]");
    if (!std::isfinite(y) || y < 0 || y > 1) throw ValidationError("y", "must be in [0, 1]");
}

void check_max_density(std::uint64_t v) {
    if (v == 0) throw ValidationError("max_density", "must be a positive integer");
}

template <typename Map>
const auto& find_or_throw(const Map& m, const std::string& id, const char* what) {
    const auto it = m.find(id);
    if (it == m.end()) throw NotFoundError(std::string(what) + " '" + id + "' not found");
    return it->second;
}

Role role_field(const json& j) {
    const auto r = parse_role(j.at("role").get<std::string>());
    if (!r) throw ValidationError("role", "unknown role");
    return *r;
}

}  // namespace

ConfigStore::ConfigStore(fs::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;
    json doc;
    try {
        doc = json::parse(in);
        const auto tokens = doc.value("tokens", json::object());
        for (const auto& [token, p] : tokens.items()) {
            tokens_[token] = {p.at("user_id").get<std::string>(), role_field(p)};
        }
        for (const auto& e : doc.value("entities", json::array())) {
            Entity ent{e.at("id"), e.at("name"), {}};
            for (const auto& u : e.value("users", json::array())) {
                ent.users.push_back({u.at("user_id").get<std::string>(), role_field(u)});
            }
            entities_[ent.id] = ent;
        }
        for (const auto& b : doc.value("buildings", json::array())) {
            buildings_[b.at("id")] = {b.at("id"), b.at("entity_id"), b.at("name")};
        }
        for (const auto& f : doc.value("floors", json::array())) {
            floors_[f.at("id")] = {f.at("id"),          f.at("building_id"), f.at("name"), f.value("map_media_type", ""),
                                   f.value("map_size", std::size_t{0}), f.at("max_density")};
        }
        for (const auto& p : doc.value("placements", json::array())) {
            placements_[p.at("scanner_id")] = {p.at("scanner_id"), p.at("floor_id"), p.at("x"), p.at("y")};
        }
        counters_ = doc.value("counters", std::map<std::string, std::uint64_t>{});
    } catch (const json::exception& e) {
        throw ValidationError("config", path_.string() + ": " + e.what());
    }
}

json ConfigStore::document() const {
    std::lock_guard lock(mu_);
    return document_locked();
}

json ConfigStore::document_locked() const {
    json doc = {{"tokens", json::object()},
                {"entities", json::array()},
                {"buildings", json::array()},
                {"floors", json::array()},
                {"placements", json::array()},
                {"counters", counters_}};
    for (const auto& [t, p] : tokens_) doc["tokens"][t] = {{"user_id", p.user_id}, {"role", to_string(p.role)}};
    for (const auto& [id, e] : entities_) doc["entities"].push_back(to_json(e));
    for (const auto& [id, b] : buildings_) doc["buildings"].push_back(to_json(b));
    for (const auto& [id, f] : floors_) doc["floors"].push_back(to_json(f));
    for (const auto& [id, p] : placements_) doc["placements"].push_back(to_json(p));
    return doc;
}

void ConfigStore::persist() {
    if (path_.empty()) return;
    const auto text = document_locked().dump(2);
    std::error_code ec;
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path(), ec);
    auto tmp = path_;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << text << "\n";
        if (!out) throw std::runtime_error(tmp.string() + ": write failed");
    }
    fs::rename(tmp, path_);
}

std::string ConfigStore::next_id(const char* prefix) { return prefix + std::to_string(++counters_[prefix]); }

fs::path ConfigStore::map_path(const std::string& floor_id) const {
    return path_.parent_path() / "maps" / (floor_id + ".bin");
}

void ConfigStore::require(const Principal& caller, Role minimum, const char* action) const {
    if (caller.role < minimum) {
        throw ForbiddenError(std::string(to_string(caller.role)) + " may not " + action);
    }
}

std::optional<Principal> ConfigStore::authenticate(const std::string& token) const {
    std::lock_guard lock(mu_);
    const auto it = tokens_.find(token);
    if (it == tokens_.end()) return std::nullopt;
    return it->second;
}

void ConfigStore::add_token(const std::string& token, Principal principal) {
    std::lock_guard lock(mu_);
    tokens_[token] = std::move(principal);
    persist();
}

Entity ConfigStore::create_entity(const Principal& caller, const std::string& name) {
    std::lock_guard lock(mu_);
    require(caller, Role::SuperAdmin, "create entities");
    check_name(name);
    Entity e{next_id("e"), name, {}};
    entities_[e.id] = e;
    persist();
    return e;
}

Entity ConfigStore::rename_entity(const Principal& caller, const std::string& id, const std::string& name) {
    std::lock_guard lock(mu_);
    require(caller, Role::SuperAdmin, "modify entities");
    check_name(name);
    find_or_throw(entities_, id, "entity");
    entities_[id].name = name;
    persist();
    return entities_[id];
}

void ConfigStore::delete_entity(const Principal& caller, const std::string& id) {
    std::lock_guard lock(mu_);
    require(caller, Role::SuperAdmin, "delete entities");
    find_or_throw(entities_, id, "entity");
    for (const auto& [bid, b] : buildings_) {
        if (b.entity_id == id) throw ConflictError("entity '" + id + "' still has buildings");
    }
    entities_.erase(id);
    persist();
}

Entity ConfigStore::add_entity_user(const Principal& caller, const std::string& entity_id, const EntityUser& user) {
    std::lock_guard lock(mu_);
    find_or_throw(entities_, entity_id, "entity");
    if (user.user_id.empty()) throw ValidationError("user_id", "must not be empty");
    if (user.role > caller.role) throw ForbiddenError("cannot grant a role above the caller's own");
    auto& users = entities_[entity_id].users;
    auto it = std::find_if(users.begin(), users.end(), [&](const EntityUser& u) { return u.user_id == user.user_id; });
    if (it != users.end()) throw ConflictError("user '" + user.user_id + "' already belongs to the entity");
    users.push_back(user);
    persist();
    return entities_[entity_id];
}

Entity ConfigStore::entity(const std::string& id) const {
    std::lock_guard lock(mu_);
    return find_or_throw(entities_, id, "entity");
}

std::vector<Entity> ConfigStore::entities() const {
    std::lock_guard lock(mu_);
    std::vector<Entity> out;
    for (const auto& [id, e] : entities_) out.push_back(e);
    return out;
}

Building ConfigStore::create_building(const Principal& caller, const std::string& entity_id, const std::string& name) {
    std::lock_guard lock(mu_);
    require(caller, Role::Admin, "create buildings");
    check_name(name);
    find_or_throw(entities_, entity_id, "entity");
    Building b{next_id("b"), entity_id, name};
    buildings_[b.id] = b;
    persist();
    return b;
}

Building ConfigStore::rename_building(const Principal& caller, const std::string& id, const std::string& name) {
    std::lock_guard lock(mu_);
    require(caller, Role::Admin, "modify buildings");
    check_name(name);
    find_or_throw(buildings_, id, "building");
    buildings_[id].name = name;
    persist();
    return buildings_[id];
}

void ConfigStore::delete_building(const Principal& caller, const std::string& id) {
    std::lock_guard lock(mu_);
    require(caller, Role::Admin, "delete buildings");
    find_or_throw(buildings_, id, "building");
    for (const auto& [fid, f] : floors_) {
        if (f.building_id == id) throw ConflictError("building '" + id + "' still has floors");
    }
    buildings_.erase(id);
    persist();
}

Building ConfigStore::building(const std::string& id) const {
    std::lock_guard lock(mu_);
    return find_or_throw(buildings_, id, "building");
}

std::vector<Building> ConfigStore::buildings() const {
    std::lock_guard lock(mu_);
    std::vector<Building> out;
    for (const auto& [id, b] : buildings_) out.push_back(b);
    return out;
}

Floor ConfigStore::create_floor(const Principal& caller, const std::string& building_id, const std::string& name,
                                std::uint64_t max_density, const std::string& map_media_type,
                                const std::string& map_image) {
    std::lock_guard lock(mu_);
    require(caller, Role::Admin, "create floors");
    check_name(name);
    check_max_density(max_density);
    find_or_throw(buildings_, building_id, "building");
    Floor f{next_id("f"), building_id, name, map_image.empty() ? "" : map_media_type, map_image.size(), max_density};
    if (!map_image.empty()) {
        const auto file = map_path(f.id);
        std::error_code ec;
        fs::create_directories(file.parent_path(), ec);
        auto tmp = file;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out.write(map_image.data(), static_cast<std::streamsize>(map_image.size()));
            if (!out) throw std::runtime_error(tmp.string() + ": write failed");
        }
        fs::rename(tmp, file);
    }
    floors_[f.id] = f;
    persist();
    return f;
}

Floor ConfigStore::rename_floor(const Principal& caller, const std::string& id, const std::string& name) {
    std::lock_guard lock(mu_);
    require(caller, Role::Admin, "modify floors");
    check_name(name);
    find_or_throw(floors_, id, "floor");
    floors_[id].name = name;
    persist();
    return floors_[id];
}

Floor ConfigStore::set_max_density(const Principal& caller, const std::string& floor_id, std::uint64_t max_density) {
    std::lock_guard lock(mu_);
    require(caller, Role::Admin, "set max density");
    check_max_density(max_density);
    find_or_throw(floors_, floor_id, "floor");
    floors_[floor_id].max_density = max_density;
    persist();
    return floors_[floor_id];
}

void ConfigStore::delete_floor(const Principal& caller, const std::string& id) {
    std::lock_guard lock(mu_);
    require(caller, Role::Admin, "delete floors");
    find_or_throw(floors_, id, "floor");
    std::erase_if(placements_, [&](const auto& kv) { return kv.second.floor_id == id; });
    floors_.erase(id);
    std::error_code ec;
    fs::remove(map_path(id), ec);
    persist();
}

Floor ConfigStore::floor(const std::string& id) const {
    std::lock_guard lock(mu_);
    return find_or_throw(floors_, id, "floor");
}

std::vector<Floor> ConfigStore::floors(const std::string& building_id) const {
    std::lock_guard lock(mu_);
    find_or_throw(buildings_, building_id, "building");
    std::vector<Floor> out;
    for (const auto& [id, f] : floors_) {
        if (f.building_id == building_id) out.push_back(f);
    }
    return out;
}

std::string ConfigStore::floor_map(const std::string& floor_id) const {
    std::lock_guard lock(mu_);
    const auto& f = find_or_throw(floors_, floor_id, "floor");
    if (f.map_size == 0) throw NotFoundError("floor '" + floor_id + "' has no map");
    std::ifstream in(map_path(floor_id), std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

ScannerPlacement ConfigStore::place_scanner(const Principal& caller, const std::string& floor_id,
                                            const std::string& scanner_id, double x, double y) {
    std::lock_guard lock(mu_);
    require(caller, Role::Admin, "place scanners");
    find_or_throw(floors_, floor_id, "floor");
    if (scanner_id.empty() || scanner_id.find_first_of("/+#") != std::string::npos) {
        throw ValidationError("scanner_id", "must be non-empty without '/', '+', '#'");
    }
    check_coordinates(x, y);
    if (placements_.contains(scanner_id)) {
        throw ConflictError("scanner '" + scanner_id + "' is already placed on floor '" +
                            placements_[scanner_id].floor_id + "'");
    }
    ScannerPlacement p{scanner_id, floor_id, x, y};
    placements_[scanner_id] = p;
    persist();
    return p;
}

ScannerPlacement ConfigStore::move_scanner(const Principal& caller, const std::string& floor_id,
                                           const std::string& scanner_id, double x, double y) {
    std::lock_guard lock(mu_);
    require(caller, Role::Admin, "move scanners");
    const auto it = placements_.find(scanner_id);
    if (it == placements_.end() || it->second.floor_id != floor_id) {
        throw NotFoundError("scanner '" + scanner_id + "' not placed on floor '" + floor_id + "'");
    }
    check_coordinates(x, y);
    it->second.x = x;
    it->second.y = y;
    persist();
    return it->second;
}

void ConfigStore::remove_scanner(const Principal& caller, const std::string& floor_id, const std::string& scanner_id) {
    std::lock_guard lock(mu_);
    require(caller, Role::Admin, "remove scanners");
    const auto it = placements_.find(scanner_id);
    if (it == placements_.end() || it->second.floor_id != floor_id) {
        throw NotFoundError("scanner '" + scanner_id + "' not placed on floor '" + floor_id + "'");
    }
    placements_.erase(it);
    persist();
}

std::vector<ScannerPlacement> ConfigStore::placements(const std::string& floor_id) const {
    std::lock_guard lock(mu_);
    find_or_throw(floors_, floor_id, "floor");
    std::vector<ScannerPlacement> out;
    for (const auto& [id, p] : placements_) {
        if (p.floor_id == floor_id) out.push_back(p);
    }
    return out;
}

std::optional<std::string> ConfigStore::floor_of_scanner(const std::string& scanner_id) const {
    std::lock_guard lock(mu_);
    const auto it = placements_.find(scanner_id);
    if (it == placements_.end()) return std::nullopt;
    return it->second.floor_id;
}

std::vector<std::string> ConfigStore::building_scanners(const std::string& building_id) const {
    std::lock_guard lock(mu_);
    find_or_throw(buildings_, building_id, "building");
    std::vector<std::string> out;
    for (const auto& [id, p] : placements_) {
        const auto f = floors_.find(p.floor_id);
        if (f != floors_.end() && f->second.building_id == building_id) out.push_back(id);
    }
    return out;
}

}  // namespace probesense::gateway
