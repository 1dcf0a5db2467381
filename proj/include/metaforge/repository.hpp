#pragma once

#include "metaforge/jsonutil.hpp"
#include "metaforge/model.hpp"
#include "metaforge/terminology.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace metaforge {

enum class PrincipalKind { user, group, everyone };

struct Principal {
  PrincipalKind kind = PrincipalKind::user;
  ResourceId id;  // empty for everyone

  static Principal user(ResourceId id) { return {PrincipalKind::user, std::move(id)}; }
  static Principal group(ResourceId id) { return {PrincipalKind::group, std::move(id)}; }
  static Principal everyone() { return {PrincipalKind::everyone, {}}; }

  auto operator<=>(const Principal&) const = default;
};

enum class Permission { none = 0, read = 1, write = 2 };

std::string_view to_string(Permission p);

struct AclEntry {
  Principal principal;
  Permission level = Permission::read;
  bool operator==(const AclEntry&) const = default;
};

enum class ResourceType { template_, element, field, instance, valueSet, provisionalTerm, folder, receipt };

std::string_view to_string(ResourceType t);
std::optional<ResourceType> resource_type_from_string(std::string_view text);

struct ResourceRecord {
  ResourceId id;
  ResourceType resourceType = ResourceType::folder;
  ResourceId parentFolder;
  ResourceId owner;  // a user
  std::vector<AclEntry> acl;
  Json payload = Json::object();
  std::string name;
  std::string description;
  std::vector<Annotation> annotations;
  std::uint64_t version = 0;
  std::string createdAt;
  std::string updatedAt;
  std::optional<ResourceId> subject;  // receipts: the instance they belong to

  bool operator==(const ResourceRecord&) const = default;
};

Json record_to_json(const ResourceRecord& r);
ResourceRecord record_from_json(const Json& doc);
Json principal_to_json(const Principal& p);
Principal principal_from_json(const Json& doc, const std::string& path = "");
Json acl_to_json(const std::vector<AclEntry>& acl);
std::vector<AclEntry> acl_from_json(const Json& doc, const std::string& path = "");

struct Group {
  ResourceId id;
  std::string name;
  ResourceId owner;
  std::vector<ResourceId> members;
  bool operator==(const Group&) const = default;
};

Json group_to_json(const Group& g);

struct User {
  ResourceId id;
  std::string name;
  std::string token;
  ResourceId homeFolder;
  bool operator==(const User&) const = default;
};

Json user_to_json(const User& u);

struct SearchQuery {
  std::optional<std::string> text;
  std::optional<ResourceType> resourceType;
  std::optional<std::string> annotatedWith;
  std::optional<ResourceId> folder;
};

/// Folder tree of resource records with ACLs, groups and users, persisted
/// as one JSON file per object under a data directory. Every mutation is
/// first appended to wal.log, then applied; opening replays a leftover log.
///
/// The root folder is readable by every user but its grants are not
/// inherited. Each user gets a home folder under the root.
class Repository {
 public:
  explicit Repository(std::filesystem::path data_dir);

  static const ResourceId& root_folder();
  static const ResourceId& system_user();

  const std::filesystem::path& data_dir() const { return dir_; }

  User create_user(const std::string& name);
  std::optional<User> user(const ResourceId& id) const;
  std::optional<User> user_by_name(const std::string& name) const;
  /// Constant-time comparison against every stored token.
  std::optional<User> user_by_token(std::string_view token) const;
  std::vector<User> users() const;

  /// Creates (unseen id, version 0, owner = actor) or updates (version + 1,
  /// expectedVersion must match). The payload is parsed and stored in
  /// canonical form. Throws PERMISSION_DENIED, VERSION_CONFLICT,
  /// INVALID_PAYLOAD, MISSING_PARENT.
  ResourceRecord put_resource(ResourceRecord record, std::optional<std::uint64_t> expectedVersion,
                              const ResourceId& actor);
  ResourceRecord get_resource(const ResourceId& id, const ResourceId& actor) const;
  ResourceRecord move_resource(const ResourceId& id, const ResourceId& newParent, const ResourceId& actor);
  /// Throws REFERENCED, FOLDER_NOT_EMPTY. Deleting an instance removes its receipts.
  void delete_resource(const ResourceId& id, const ResourceId& actor);
  std::vector<ResourceRecord> list_children(const ResourceId& folder, const ResourceId& actor) const;
  std::vector<ResourceRecord> search(const SearchQuery& q, const ResourceId& actor) const;
  ResourceRecord set_permissions(const ResourceId& id, std::vector<AclEntry> acl, const ResourceId& actor);
  Permission effective_permission(const ResourceId& actor, const ResourceId& id) const;

  Group create_group(const std::string& name, const ResourceId& actor);
  Group add_member(const ResourceId& group, const ResourceId& user, const ResourceId& actor);
  Group remove_member(const ResourceId& group, const ResourceId& user, const ResourceId& actor);
  /// Replaces the member list; the owner stays a member.
  Group set_members(const ResourceId& group, const std::vector<ResourceId>& members, const ResourceId& actor);
  std::optional<Group> group(const ResourceId& id) const;

  // Unchecked reads for internal consumers (indexes, term store).
  std::optional<ResourceRecord> find(const ResourceId& id) const;
  std::vector<ResourceRecord> records_of_type(ResourceType type) const;
  std::vector<ResourceRecord> receipts_of(const ResourceId& instance) const;

 private:
  struct Op {
    enum Kind { put_record, erase_record, put_group, put_user } kind;
    Json doc;
    ResourceId id;
  };

  void open();
  void commit(const std::vector<Op>& ops);
  void apply(const Op& op);
  void apply_to_disk(const Op& op) const;
  void write_file(const std::filesystem::path& file, const std::string& text) const;

  Permission permission_locked(const ResourceId& actor, const ResourceId& id) const;
  bool principal_matches(const Principal& p, const ResourceId& actor) const;
  const ResourceRecord& require_locked(const ResourceId& id) const;
  void require_permission(const ResourceId& actor, const ResourceId& id, Permission level) const;
  bool is_descendant_folder(const ResourceId& candidate, const ResourceId& folder) const;
  void canonicalize_payload(ResourceRecord& r) const;
  bool referenced_elsewhere(const ResourceId& id) const;
  Group& require_group_owner(const ResourceId& group, const ResourceId& actor);
  ResourceRecord make_folder(const ResourceId& id, const ResourceId& parent, const ResourceId& owner,
                             const std::string& name) const;

  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
  std::map<ResourceId, ResourceRecord> records_;
  std::map<ResourceId, Group> groups_;
  std::map<ResourceId, User> users_;
};

/// Term store whose provisional terms and value sets are repository
/// records, readable by every user.
class RepositoryTermStore : public TermStore {
 public:
  RepositoryTermStore(Repository& repo) : repo_(repo) {}

  std::vector<ProvisionalTerm> provisional_terms() const override;
  void add_provisional_term(const ProvisionalTerm& term, const std::optional<ResourceId>& actor) override;
  std::optional<ValueSet> value_set(const ResourceId& id) const override;
  void add_value_set(const ValueSet& set, const std::optional<ResourceId>& actor) override;

 private:
  void put(ResourceType type, const ResourceId& id, const std::string& name, Json payload,
           const std::optional<ResourceId>& actor);
  Repository& repo_;
};

}  // namespace metaforge
