#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace probesense::gateway {

enum class Role { User = 0, Admin = 1, SuperAdmin = 2 };
const char* to_string(Role r);
std::optional<Role> parse_role(std::string_view text);

struct Principal {
    std::string user_id;
    Role role = Role::User;
};

class ForbiddenError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConflictError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EntityUser {
    std::string user_id;
    Role role = Role::User;
};

struct Entity {
    std::string id;
    std::string name;
    std::vector<EntityUser> users;
};

struct Building {
    std::string id;
    std::string entity_id;
    std::string name;
};

struct Floor {
    std::string id;
    std::string building_id;
    std::string name;
    std::string map_media_type;  ///< empty when no map was uploaded
    std::size_t map_size = 0;
    std::uint64_t max_density = 1;
};

struct ScannerPlacement {
    std::string scanner_id;
    std::string floor_id;
    double x = 0;
    double y = 0;
};

nlohmann::json to_json(const Entity& e);
nlohmann::json to_json(const Building& b);
nlohmann::json to_json(const Floor& f);
nlohmann::json to_json(const ScannerPlacement& p);

/// Deployment configuration persisted as one JSON document. Each mutation
/// checks the caller's role, then rewrites the document through a temporary
/// file and rename. Map images live next to it under `maps/`.
class ConfigStore {
public:
    /// Loads `path` if it exists; otherwise starts empty.
    explicit ConfigStore(std::filesystem::path path);

    /// Bearer token lookup.
    std::optional<Principal> authenticate(const std::string& token) const;
    void add_token(const std::string& token, Principal principal);

    Entity create_entity(const Principal& caller, const std::string& name);
    Entity rename_entity(const Principal& caller, const std::string& id, const std::string& name);
    void delete_entity(const Principal& caller, const std::string& id);
    Entity add_entity_user(const Principal& caller, const std::string& entity_id, const EntityUser& user);
    Entity entity(const std::string& id) const;
    std::vector<Entity> entities() const;

    Building create_building(const Principal& caller, const std::string& entity_id, const std::string& name);
    Building rename_building(const Principal& caller, const std::string& id, const std::string& name);
    void delete_building(const Principal& caller, const std::string& id);
    Building building(const std::string& id) const;
    std::vector<Building> buildings() const;

    Floor create_floor(const Principal& caller, const std::string& building_id, const std::string& name,
                       std::uint64_t max_density, const std::string& map_media_type, const std::string& map_image);
    Floor rename_floor(const Principal& caller, const std::string& id, const std::string& name);
    Floor set_max_density(const Principal& caller, const std::string& floor_id, std::uint64_t max_density);
    void delete_floor(const Principal& caller, const std::string& id);
    Floor floor(const std::string& id) const;
    std::vector<Floor> floors(const std::string& building_id) const;
    /// Map image bytes exactly as uploaded.
    std::string floor_map(const std::string& floor_id) const;

    ScannerPlacement place_scanner(const Principal& caller, const std::string& floor_id, const std::string& scanner_id,
                                   double x, double y);
    ScannerPlacement move_scanner(const Principal& caller, const std::string& floor_id, const std::string& scanner_id,
                                  double x, double y);
    void remove_scanner(const Principal& caller, const std::string& floor_id, const std::string& scanner_id);
    std::vector<ScannerPlacement> placements(const std::string& floor_id) const;
    /// Floor holding the scanner, if placed.
    std::optional<std::string> floor_of_scanner(const std::string& scanner_id) const;
    /// Scanner ids on every floor of the building.
    std::vector<std::string> building_scanners(const std::string& building_id) const;

    nlohmann::json document() const;

private:
    void require(const Principal& caller, Role minimum, const char* action) const;
    nlohmann::json document_locked() const;
    void persist();
    std::string next_id(const char* prefix);
    std::filesystem::path map_path(const std::string& floor_id) const;

    std::filesystem::path path_;
    mutable std::mutex mu_;
    std::map<std::string, Principal> tokens_;
    std::map<std::string, Entity> entities_;
    std::map<std::string, Building> buildings_;
    std::map<std::string, Floor> floors_;
    std::map<std::string, ScannerPlacement> placements_;  // by scanner_id
    std::map<std::string, std::uint64_t> counters_;
};

}  // namespace probesense::gateway
