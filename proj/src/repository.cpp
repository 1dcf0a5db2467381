#include "metaforge/repository.hpp"

#include "metaforge/error.hpp"
#include "metaforge/instance_io.hpp"
#include "metaforge/template_io.hpp"
#include "metaforge/text.hpp"

#include <openssl/crypto.h>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>
#include <tuple>

namespace metaforge {

namespace fs = std::filesystem;

std::string_view to_string(Permission p) {
  switch (p) {
    case Permission::none: return "none";
    case Permission::read: return "read";
    case Permission::write: return "write";
  }
  return "none";
}

namespace {

constexpr std::pair<ResourceType, std::string_view> type_names[] = {
    {ResourceType::template_, "template"}, {ResourceType::element, "element"},
    {ResourceType::field, "field"},         {ResourceType::instance, "instance"},
    {ResourceType::valueSet, "valueSet"},   {ResourceType::provisionalTerm, "provisionalTerm"},
    {ResourceType::folder, "folder"},       {ResourceType::receipt, "receipt"},
};

std::string_view principal_kind_name(PrincipalKind k) {
  switch (k) {
    case PrincipalKind::user: return "user";
    case PrincipalKind::group: return "group";
    case PrincipalKind::everyone: return "everyone";
  }
  return "user";
}

[[noreturn]] void invalid_payload(const std::string& message, const std::string& path = "") {
  throw Error(errc::invalid_payload, message, path);
}

const std::string& member_string(const Json& doc, const char* key, const std::string& path) {
  if (!doc.is_object() || !doc.contains(key) || !doc[key].is_string())
    throw Error(errc::invalid_payload, std::string("expected string member '") + key + "'", json_pointer_append(path, key));
  return doc[key].get_ref<const std::string&>();
}

ResourceId id_member(const Json& doc, const char* key, const std::string& path) {
  const std::string& text = member_string(doc, key, path);
  if (!is_resource_id(text)) invalid_payload("not a resource id", json_pointer_append(path, key));
  return ResourceId::parse(text);
}

Permission max_permission(Permission a, Permission b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(errc::storage_failure, "cannot read " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

std::string_view to_string(ResourceType t) {
  for (const auto& [type, name] : type_names)
    if (type == t) return name;
  return "folder";
}

std::optional<ResourceType> resource_type_from_string(std::string_view text) {
  for (const auto& [type, name] : type_names)
    if (name == text) return type;
  return std::nullopt;
}

// ---- JSON forms --------------------------------------------------------

Json principal_to_json(const Principal& p) {
  Json out = Json::object();
  out["kind"] = std::string(principal_kind_name(p.kind));
  if (p.kind != PrincipalKind::everyone) out["id"] = p.id.str();
  return out;
}

Principal principal_from_json(const Json& doc, const std::string& path) {
  const std::string& kind = member_string(doc, "kind", path);
  if (kind == "everyone") {
    if (doc.contains("id")) invalid_payload("everyone has no id", json_pointer_append(path, "id"));
    return Principal::everyone();
  }
  if (kind == "user") return Principal::user(id_member(doc, "id", path));
  if (kind == "group") return Principal::group(id_member(doc, "id", path));
  invalid_payload("unknown principal kind '" + kind + "'", json_pointer_append(path, "kind"));
}

Json acl_to_json(const std::vector<AclEntry>& acl) {
  Json out = Json::array();
  for (const auto& e : acl) out.push_back(Json{{"principal", principal_to_json(e.principal)}, {"level", std::string(to_string(e.level))}});
  return out;
}

std::vector<AclEntry> acl_from_json(const Json& doc, const std::string& path) {
  if (!doc.is_array()) invalid_payload("acl must be an array", path);
  std::vector<AclEntry> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string at = json_pointer_append(path, i);
    if (!doc[i].is_object() || !doc[i].contains("principal")) invalid_payload("acl entry needs a principal", at);
    AclEntry e;
    e.principal = principal_from_json(doc[i]["principal"], at + "/principal");
    const std::string& level = member_string(doc[i], "level", at);
    if (level == "read") e.level = Permission::read;
    else if (level == "write") e.level = Permission::write;
    else invalid_payload("level must be read or write", at + "/level");
    out.push_back(std::move(e));
  }
  return out;
}

Json record_to_json(const ResourceRecord& r) {
  Json out = Json::object();
  out["id"] = r.id.str();
  out["resourceType"] = std::string(to_string(r.resourceType));
  out["parentFolder"] = r.parentFolder.str();
  out["owner"] = principal_to_json(Principal::user(r.owner));
  out["acl"] = acl_to_json(r.acl);
  out["name"] = r.name;
  out["description"] = r.description;
  out["annotations"] = Json::array();
  for (const auto& a : r.annotations) out["annotations"].push_back(annotation_to_json(a));
  out["version"] = r.version;
  out["createdAt"] = r.createdAt;
  out["updatedAt"] = r.updatedAt;
  if (r.subject) out["subject"] = r.subject->str();
  out["payload"] = r.payload;
  return out;
}

ResourceRecord record_from_json(const Json& doc) {
  if (!doc.is_object()) invalid_payload("record must be an object");
  ResourceRecord r;
  r.id = id_member(doc, "id", "");
  auto type = resource_type_from_string(member_string(doc, "resourceType", ""));
  if (!type) invalid_payload("unknown resourceType", "/resourceType");
  r.resourceType = *type;
  r.parentFolder = id_member(doc, "parentFolder", "");
  r.owner = principal_from_json(doc.at("owner"), "/owner").id;
  r.acl = acl_from_json(doc.at("acl"), "/acl");
  r.name = member_string(doc, "name", "");
  r.description = member_string(doc, "description", "");
  r.annotations = annotations_from_json(doc.at("annotations"), "/annotations");
  r.version = doc.at("version").get<std::uint64_t>();
  r.createdAt = member_string(doc, "createdAt", "");
  r.updatedAt = member_string(doc, "updatedAt", "");
  if (doc.contains("subject")) r.subject = id_member(doc, "subject", "");
  r.payload = doc.at("payload");
  return r;
}

Json group_to_json(const Group& g) {
  Json out = Json::object();
  out["id"] = g.id.str();
  out["name"] = g.name;
  out["owner"] = g.owner.str();
  out["members"] = Json::array();
  for (const auto& m : g.members) out["members"].push_back(m.str());
  return out;
}

namespace {

Group group_from_json(const Json& doc) {
  Group g;
  g.id = id_member(doc, "id", "");
  g.name = member_string(doc, "name", "");
  g.owner = id_member(doc, "owner", "");
  for (const auto& m : doc.at("members")) g.members.push_back(ResourceId::parse(m.get<std::string>()));
  return g;
}

User user_from_json(const Json& doc) {
  return {id_member(doc, "id", ""), member_string(doc, "name", ""), member_string(doc, "token", ""),
          id_member(doc, "homeFolder", "")};
}

}  // namespace

Json user_to_json(const User& u) {
  Json out = Json::object();
  out["id"] = u.id.str();
  out["name"] = u.name;
  out["token"] = u.token;
  out["homeFolder"] = u.homeFolder.str();
  return out;
}

// ---- repository --------------------------------------------------------

const ResourceId& Repository::root_folder() {
  static const ResourceId id = ResourceId::parse("00000000-0000-4000-8000-000000000000");
  return id;
}

const ResourceId& Repository::system_user() {
  static const ResourceId id = ResourceId::parse("00000000-0000-4000-8000-000000000001");
  return id;
}

Repository::Repository(fs::path data_dir) : dir_(std::move(data_dir)) { open(); }

ResourceRecord Repository::make_folder(const ResourceId& id, const ResourceId& parent, const ResourceId& owner,
                                       const std::string& name) const {
  ResourceRecord f;
  f.id = id;
  f.resourceType = ResourceType::folder;
  f.parentFolder = parent;
  f.owner = owner;
  f.acl = {{Principal::user(owner), Permission::write}};
  f.name = name;
  f.createdAt = f.updatedAt = now_rfc3339();
  return f;
}

void Repository::open() {
  std::error_code ec;
  for (const char* sub : {"resources", "groups", "users"}) fs::create_directories(dir_ / sub, ec);
  if (ec) throw Error(errc::storage_failure, "cannot create " + dir_.string() + ": " + ec.message());

  auto load_dir = [&](const char* sub, auto&& handle) {
    for (const auto& entry : fs::directory_iterator(dir_ / sub)) {
      if (entry.path().extension() != ".json") continue;
      try {
        handle(parse_json(read_file(entry.path())));
      } catch (const Error& e) {
        throw Error(errc::storage_failure, "corrupt " + entry.path().string() + ": " + e.what());
      } catch (const std::exception& e) {
        throw Error(errc::storage_failure, "corrupt " + entry.path().string() + ": " + e.what());
      }
    }
  };
  load_dir("resources", [&](const Json& doc) {
    auto r = record_from_json(doc);
    records_.insert_or_assign(r.id, std::move(r));
  });
  load_dir("groups", [&](const Json& doc) {
    auto g = group_from_json(doc);
    groups_.insert_or_assign(g.id, std::move(g));
  });
  load_dir("users", [&](const Json& doc) {
    auto u = user_from_json(doc);
    users_.insert_or_assign(u.id, std::move(u));
  });

  // Complete log lines are committed transactions; a torn last line is not.
  const fs::path wal = dir_ / "wal.log";
  if (fs::exists(wal)) {
    std::istringstream lines(read_file(wal));
    std::string line;
    while (std::getline(lines, line)) {
      if (lines.eof()) break;  // no trailing LF: torn write
      Json tx;
      try {
        tx = parse_json(line);
      } catch (const Error&) {
        break;
      }
      for (const auto& item : tx.at("ops")) {
        Op op{static_cast<Op::Kind>(item.at("op").get<int>()), item.at("doc"), ResourceId::parse(item.at("id").get<std::string>())};
        apply(op);
        apply_to_disk(op);
      }
    }
    fs::resize_file(wal, 0, ec);
  }

  if (!records_.contains(root_folder())) {
    ResourceRecord root = make_folder(root_folder(), root_folder(), system_user(), "root");
    root.acl.push_back({Principal::everyone(), Permission::read});
    commit({{Op::put_record, record_to_json(root), root.id}});
  }
}

void Repository::write_file(const fs::path& file, const std::string& text) const {
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out.flush()) throw Error(errc::storage_failure, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) throw Error(errc::storage_failure, "cannot replace " + file.string() + ": " + ec.message());
}

void Repository::apply(const Op& op) {
  switch (op.kind) {
    case Op::put_record: records_.insert_or_assign(op.id, record_from_json(op.doc)); break;
    case Op::erase_record: records_.erase(op.id); break;
    case Op::put_group: groups_.insert_or_assign(op.id, group_from_json(op.doc)); break;
    case Op::put_user: users_.insert_or_assign(op.id, user_from_json(op.doc)); break;
  }
}

void Repository::apply_to_disk(const Op& op) const {
  const std::string name = op.id.str() + ".json";
  switch (op.kind) {
    case Op::put_record: write_file(dir_ / "resources" / name, dump_canonical(op.doc)); break;
    case Op::erase_record: {
      std::error_code ec;
      fs::remove(dir_ / "resources" / name, ec);
      break;
    }
    case Op::put_group: write_file(dir_ / "groups" / name, dump_canonical(op.doc)); break;
    case Op::put_user: write_file(dir_ / "users" / name, dump_canonical(op.doc)); break;
  }
}

// Caller holds the write lock.
void Repository::commit(const std::vector<Op>& ops) {
  Json tx = Json::object();
  tx["ops"] = Json::array();
  for (const auto& op : ops) tx["ops"].push_back(Json{{"op", static_cast<int>(op.kind)}, {"id", op.id.str()}, {"doc", op.doc}});
  const std::string line = tx.dump() + "\n";

  const fs::path wal = dir_ / "wal.log";
  const int fd = ::open(wal.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(errc::storage_failure, "cannot open " + wal.string());
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd, line.data() + written, line.size() - written);
    if (n <= 0) {
      ::close(fd);
      throw Error(errc::storage_failure, "cannot append to " + wal.string());
    }
    written += static_cast<std::size_t>(n);
  }
  const bool synced = ::fdatasync(fd) == 0;
  ::close(fd);
  if (!synced) throw Error(errc::storage_failure, "cannot sync " + wal.string());

  for (const auto& op : ops) apply(op);
  for (const auto& op : ops) apply_to_disk(op);
  std::error_code ec;
  fs::resize_file(wal, 0, ec);
}

// ---- users and groups --------------------------------------------------

User Repository::create_user(const std::string& name) {
  const std::string clean = trim(name);
  if (clean.empty()) throw Error(errc::invalid_argument, "user name is empty");
  std::unique_lock lock(mutex_);
  for (const auto& [id, u] : users_)
    if (u.name == clean) throw Error(errc::invalid_argument, "user '" + clean + "' exists");
  User u{ResourceId::generate(), clean, random_hex(24), ResourceId::generate()};
  ResourceRecord home = make_folder(u.homeFolder, root_folder(), u.id, clean);
  commit({{Op::put_user, user_to_json(u), u.id}, {Op::put_record, record_to_json(home), home.id}});
  return u;
}

std::optional<User> Repository::user(const ResourceId& id) const {
  std::shared_lock lock(mutex_);
  auto it = users_.find(id);
  if (it == users_.end()) return std::nullopt;
  return it->second;
}

std::optional<User> Repository::user_by_name(const std::string& name) const {
  std::shared_lock lock(mutex_);
  for (const auto& [id, u] : users_)
    if (u.name == name) return u;
  return std::nullopt;
}

std::optional<User> Repository::user_by_token(std::string_view token) const {
  std::shared_lock lock(mutex_);
  std::optional<User> found;
  for (const auto& [id, u] : users_) {
    if (u.token.size() == token.size() && CRYPTO_memcmp(u.token.data(), token.data(), token.size()) == 0) found = u;
  }
  return found;
}

std::vector<User> Repository::users() const {
  std::shared_lock lock(mutex_);
  std::vector<User> out;
  for (const auto& [id, u] : users_) out.push_back(u);
  return out;
}

Group Repository::create_group(const std::string& name, const ResourceId& actor) {
  const std::string clean = trim(name);
  if (clean.empty()) throw Error(errc::invalid_argument, "group name is empty");
  std::unique_lock lock(mutex_);
  if (!users_.contains(actor)) throw Error(errc::permission_denied, "unknown user");
  Group g{ResourceId::generate(), clean, actor, {actor}};
  commit({{Op::put_group, group_to_json(g), g.id}});
  return g;
}

Group& Repository::require_group_owner(const ResourceId& group, const ResourceId& actor) {
  auto it = groups_.find(group);
  if (it == groups_.end()) throw Error(errc::not_found, "no group " + group.str());
  if (it->second.owner != actor) throw Error(errc::permission_denied, "only the group owner changes membership");
  return it->second;
}

Group Repository::add_member(const ResourceId& group, const ResourceId& user, const ResourceId& actor) {
  std::unique_lock lock(mutex_);
  Group g = require_group_owner(group, actor);
  if (!users_.contains(user)) throw Error(errc::not_found, "no user " + user.str());
  if (std::find(g.members.begin(), g.members.end(), user) != g.members.end())
    throw Error(errc::duplicate_member, "already a member");
  g.members.push_back(user);
  commit({{Op::put_group, group_to_json(g), g.id}});
  return g;
}

Group Repository::remove_member(const ResourceId& group, const ResourceId& user, const ResourceId& actor) {
  std::unique_lock lock(mutex_);
  Group g = require_group_owner(group, actor);
  auto it = std::find(g.members.begin(), g.members.end(), user);
  if (it == g.members.end()) throw Error(errc::not_found, "not a member");
  if (user == g.owner) throw Error(errc::owner_immutable, "the group owner stays a member");
  g.members.erase(it);
  commit({{Op::put_group, group_to_json(g), g.id}});
  return g;
}

Group Repository::set_members(const ResourceId& group, const std::vector<ResourceId>& members, const ResourceId& actor) {
  std::unique_lock lock(mutex_);
  Group g = require_group_owner(group, actor);
  std::vector<ResourceId> next{g.owner};
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (!users_.contains(members[i])) throw Error(errc::not_found, "no user " + members[i].str(), json_pointer_append("/members", i));
    if (std::find(next.begin(), next.end(), members[i]) != next.end()) {
      if (members[i] == g.owner) continue;
      throw Error(errc::duplicate_member, "repeated member", json_pointer_append("/members", i));
    }
    next.push_back(members[i]);
  }
  g.members = std::move(next);
  commit({{Op::put_group, group_to_json(g), g.id}});
  return g;
}

std::optional<Group> Repository::group(const ResourceId& id) const {
  std::shared_lock lock(mutex_);
  auto it = groups_.find(id);
  if (it == groups_.end()) return std::nullopt;
  return it->second;
}

// ---- permissions -------------------------------------------------------

bool Repository::principal_matches(const Principal& p, const ResourceId& actor) const {
  switch (p.kind) {
    case PrincipalKind::everyone: return true;
    case PrincipalKind::user: return p.id == actor;
    case PrincipalKind::group: {
      auto it = groups_.find(p.id);
      return it != groups_.end() && std::find(it->second.members.begin(), it->second.members.end(), actor) != it->second.members.end();
    }
  }
  return false;
}

const ResourceRecord& Repository::require_locked(const ResourceId& id) const {
  auto it = records_.find(id);
  if (it == records_.end()) throw Error(errc::not_found, "no resource " + id.str());
  return it->second;
}

Permission Repository::permission_locked(const ResourceId& actor, const ResourceId& id) const {
  const ResourceRecord& record = require_locked(id);
  if (record.resourceType == ResourceType::receipt)
    return record.subject && records_.contains(*record.subject) ? permission_locked(actor, *record.subject) : Permission::none;
  if (actor != system_user() && !users_.contains(actor)) return Permission::none;
  if (record.owner == actor) return Permission::write;
  Permission best = Permission::none;
  const ResourceRecord* node = &record;
  for (std::size_t depth = 0;; ++depth) {
    // Grants on the root folder apply to the root itself only.
    if (depth == 0 || node->id != root_folder())
      for (const auto& e : node->acl)
        if (principal_matches(e.principal, actor)) best = max_permission(best, e.level);
    if (best == Permission::write || node->id == root_folder()) break;
    auto parent = records_.find(node->parentFolder);
    if (parent == records_.end() || depth > records_.size()) break;
    node = &parent->second;
  }
  return best;
}

Permission Repository::effective_permission(const ResourceId& actor, const ResourceId& id) const {
  std::shared_lock lock(mutex_);
  return permission_locked(actor, id);
}

void Repository::require_permission(const ResourceId& actor, const ResourceId& id, Permission level) const {
  if (static_cast<int>(permission_locked(actor, id)) < static_cast<int>(level))
    throw Error(errc::permission_denied, std::string(to_string(level)) + " access to " + id.str() + " denied");
}

bool Repository::is_descendant_folder(const ResourceId& candidate, const ResourceId& folder) const {
  ResourceId at = candidate;
  for (std::size_t steps = 0; steps <= records_.size(); ++steps) {
    if (at == folder) return true;
    if (at == root_folder()) return false;
    auto it = records_.find(at);
    if (it == records_.end()) return false;
    at = it->second.parentFolder;
  }
  return false;
}

namespace {

std::vector<AclEntry> merge_acl(const std::vector<AclEntry>& acl) {
  std::vector<AclEntry> out;
  for (const auto& e : acl) {
    auto it = std::find_if(out.begin(), out.end(), [&](const AclEntry& x) { return x.principal == e.principal; });
    if (it == out.end()) out.push_back(e);
    else it->level = max_permission(it->level, e.level);
  }
  return out;
}

}  // namespace

// ---- resources ---------------------------------------------------------

void Repository::canonicalize_payload(ResourceRecord& r) const {
  if (!r.payload.is_object()) invalid_payload("payload must be a JSON object", "/payload");
  try {
    switch (r.resourceType) {
      case ResourceType::template_:
      case ResourceType::element:
      case ResourceType::field: {
        if (!r.payload.contains("id")) r.payload["id"] = r.id.str();
        if (r.payload["id"] != r.id.str()) invalid_payload("payload id differs from the resource id", "/payload/id");
        Template t = template_from_json(r.payload);
        const TemplateKind expected = r.resourceType == ResourceType::template_ ? TemplateKind::template_
                                      : r.resourceType == ResourceType::element ? TemplateKind::element
                                                                                : TemplateKind::field;
        if (t.kind != expected) invalid_payload("payload kind does not match the resource type", "/payload/kind");
        t.version = r.version;
        r.payload = template_to_json(t);
        r.name = t.name;
        r.description = t.description.value_or("");
        r.annotations = t.annotations;
        if (t.field)
          for (const auto& a : t.field->annotations) r.annotations.push_back(a);
        break;
      }
      case ResourceType::instance: {
        MetadataInstance m = instance_from_json(r.payload);
        auto tmpl = records_.find(m.templateId);
        if (tmpl == records_.end() || tmpl->second.resourceType != ResourceType::template_)
          invalid_payload("instance refers to unknown template " + m.templateId.str(), "/payload/@type");
        r.payload = instance_to_json(m);
        if (trim(r.name).empty()) r.name = tmpl->second.name + " instance";
        break;
      }
      case ResourceType::valueSet: {
        if (!r.payload.contains("id")) r.payload["id"] = r.id.str();
        ValueSet set = value_set_from_json(r.payload);
        if (set.id != r.id) invalid_payload("payload id differs from the resource id", "/payload/id");
        r.payload = value_set_to_json(set);
        r.name = set.name;
        break;
      }
      case ResourceType::provisionalTerm: {
        if (!r.payload.contains("id")) r.payload["id"] = r.id.str();
        ProvisionalTerm term = provisional_term_from_json(r.payload);
        if (term.id != r.id) invalid_payload("payload id differs from the resource id", "/payload/id");
        r.payload = provisional_term_to_json(term);
        r.name = term.label;
        break;
      }
      case ResourceType::folder:
        r.payload = Json::object();
        break;
      case ResourceType::receipt:
        if (!r.subject) invalid_payload("receipt without subject");
        break;
    }
  } catch (const Error& e) {
    if (e.code() == errc::invalid_payload) throw;
    throw Error(errc::invalid_payload, e.what(), "/payload" + e.path());
  }
  if (trim(r.name).empty()) invalid_payload("name is empty", "/name");
}

ResourceRecord Repository::put_resource(ResourceRecord record, std::optional<std::uint64_t> expectedVersion,
                                        const ResourceId& actor) {
  std::unique_lock lock(mutex_);
  if (actor != system_user() && !users_.contains(actor)) throw Error(errc::permission_denied, "unknown user");
  auto existing = records_.find(record.id);
  const std::string now = now_rfc3339();
  if (existing == records_.end()) {
    if (record.id.empty()) record.id = ResourceId::generate();
    if (record.resourceType == ResourceType::receipt) {
      if (!record.subject || !records_.contains(*record.subject)) throw Error(errc::missing_parent, "receipt subject not found");
      record.parentFolder = records_.at(*record.subject).parentFolder;
      require_permission(actor, *record.subject, Permission::read);
    } else {
      auto parent = records_.find(record.parentFolder);
      if (parent == records_.end() || parent->second.resourceType != ResourceType::folder)
        throw Error(errc::missing_parent, "parent folder " + record.parentFolder.str() + " not found", "/parentFolder");
      require_permission(actor, record.parentFolder, Permission::write);
    }
    record.owner = actor;
    record.version = 0;
    record.acl.insert(record.acl.begin(), AclEntry{Principal::user(actor), Permission::write});
    record.acl = merge_acl(record.acl);
    record.createdAt = record.updatedAt = now;
    canonicalize_payload(record);
  } else {
    const ResourceRecord& stored = existing->second;
    require_permission(actor, stored.id, Permission::write);
    if (!expectedVersion) throw Error(errc::invalid_argument, "updates need the expected version");
    if (*expectedVersion != stored.version)
      throw Error(errc::version_conflict, "expected version " + std::to_string(*expectedVersion) + ", stored version is " +
                                              std::to_string(stored.version));
    if (record.resourceType != stored.resourceType) invalid_payload("resource type cannot change", "/resourceType");
    record.parentFolder = stored.parentFolder;
    record.owner = stored.owner;
    record.acl = stored.acl;
    record.subject = stored.subject;
    record.createdAt = stored.createdAt;
    record.updatedAt = now;
    record.version = stored.version + 1;
    canonicalize_payload(record);
  }
  commit({{Op::put_record, record_to_json(record), record.id}});
  return record;
}

ResourceRecord Repository::get_resource(const ResourceId& id, const ResourceId& actor) const {
  std::shared_lock lock(mutex_);
  const ResourceRecord& r = require_locked(id);
  require_permission(actor, id, Permission::read);
  return r;
}

ResourceRecord Repository::move_resource(const ResourceId& id, const ResourceId& newParent, const ResourceId& actor) {
  std::unique_lock lock(mutex_);
  ResourceRecord r = require_locked(id);
  const ResourceRecord& dest = require_locked(newParent);
  if (dest.resourceType != ResourceType::folder) throw Error(errc::not_found, newParent.str() + " is not a folder");
  if (r.resourceType == ResourceType::receipt) throw Error(errc::invalid_argument, "receipts follow their instance");
  if (r.resourceType == ResourceType::folder && is_descendant_folder(newParent, id))
    throw Error(errc::cyclic_move, "cannot move a folder into its own subtree");
  require_permission(actor, id, Permission::write);
  require_permission(actor, newParent, Permission::write);
  r.parentFolder = newParent;
  r.version += 1;
  r.updatedAt = now_rfc3339();
  std::vector<Op> ops{{Op::put_record, record_to_json(r), r.id}};
  for (const auto& [rid, rec] : records_) {
    if (rec.resourceType == ResourceType::receipt && rec.subject == id) {
      ResourceRecord moved = rec;
      moved.parentFolder = newParent;
      ops.push_back({Op::put_record, record_to_json(moved), rid});
    }
  }
  commit(ops);
  return r;
}

bool Repository::referenced_elsewhere(const ResourceId& id) const {
  const std::string& key = id.str();
  const std::string suffix = ":" + key;
  std::function<bool(const Json&)> mentions = [&](const Json& v) {
    if (v.is_string()) {
      const auto& s = v.get_ref<const std::string&>();
      return s == key || s.ends_with(suffix);
    }
    if (v.is_structured())
      for (const auto& item : v)
        if (mentions(item)) return true;
    return false;
  };
  for (const auto& [rid, rec] : records_) {
    if (rid == id || rec.resourceType == ResourceType::receipt || rec.resourceType == ResourceType::folder) continue;
    Json body = rec.payload;
    if (body.is_object()) body.erase("id");
    if (mentions(body)) return true;
  }
  return false;
}

void Repository::delete_resource(const ResourceId& id, const ResourceId& actor) {
  std::unique_lock lock(mutex_);
  const ResourceRecord& r = require_locked(id);
  if (id == root_folder()) throw Error(errc::permission_denied, "the root folder cannot be deleted");
  for (const auto& [uid, u] : users_)
    if (u.homeFolder == id) throw Error(errc::permission_denied, "home folders cannot be deleted");
  require_permission(actor, id, Permission::write);
  std::vector<Op> ops{{Op::erase_record, Json::object(), id}};
  if (r.resourceType == ResourceType::folder) {
    for (const auto& [rid, rec] : records_)
      if (rec.parentFolder == id && rid != id) throw Error(errc::folder_not_empty, "folder is not empty");
  } else if (r.resourceType != ResourceType::receipt) {
    if (referenced_elsewhere(id)) throw Error(errc::referenced, "resource is referenced by another resource");
    for (const auto& [rid, rec] : records_)
      if (rec.resourceType == ResourceType::receipt && rec.subject == id) ops.push_back({Op::erase_record, Json::object(), rid});
  }
  commit(ops);
}

std::vector<ResourceRecord> Repository::list_children(const ResourceId& folder, const ResourceId& actor) const {
  std::shared_lock lock(mutex_);
  const ResourceRecord& f = require_locked(folder);
  if (f.resourceType != ResourceType::folder) throw Error(errc::not_found, folder.str() + " is not a folder");
  require_permission(actor, folder, Permission::read);
  std::vector<ResourceRecord> out;
  for (const auto& [id, rec] : records_) {
    if (rec.parentFolder != folder || id == folder || rec.resourceType == ResourceType::receipt) continue;
    if (permission_locked(actor, id) != Permission::none) out.push_back(rec);
  }
  std::sort(out.begin(), out.end(), [](const ResourceRecord& a, const ResourceRecord& b) {
    const bool fa = a.resourceType == ResourceType::folder;
    const bool fb = b.resourceType == ResourceType::folder;
    return std::make_tuple(!fa, casefold(a.name), a.id) < std::make_tuple(!fb, casefold(b.name), b.id);
  });
  return out;
}

std::vector<ResourceRecord> Repository::search(const SearchQuery& q, const ResourceId& actor) const {
  std::vector<std::string> tokens;
  if (q.text) {
    for (auto& t : tokenize(*q.text))
      if (std::find(tokens.begin(), tokens.end(), t) == tokens.end()) tokens.push_back(std::move(t));
    if (tokens.empty()) throw Error(errc::invalid_query, "search text has no words");
  }
  if (!q.text && !q.resourceType && !q.annotatedWith && !q.folder)
    throw Error(errc::invalid_query, "a search needs text or a facet");

  std::shared_lock lock(mutex_);
  if (q.folder) {
    const ResourceRecord& f = require_locked(*q.folder);
    if (f.resourceType != ResourceType::folder) throw Error(errc::invalid_query, q.folder->str() + " is not a folder");
  }
  struct Hit {
    std::size_t matched;
    bool name_match;
    std::string name_key;
    const ResourceRecord* record;
  };
  std::vector<Hit> hits;
  for (const auto& [id, rec] : records_) {
    if (q.resourceType ? rec.resourceType != *q.resourceType : rec.resourceType == ResourceType::receipt) continue;
    if (q.annotatedWith &&
        std::none_of(rec.annotations.begin(), rec.annotations.end(), [&](const Annotation& a) { return a.termIri == *q.annotatedWith; }))
      continue;
    if (q.folder && (id == *q.folder || !is_descendant_folder(rec.parentFolder, *q.folder))) continue;
    std::size_t matched = 0;
    bool name_match = false;
    if (!tokens.empty()) {
      const auto name_tokens = tokenize(rec.name);
      const auto desc_tokens = tokenize(rec.description);
      for (const auto& t : tokens) {
        const bool in_name = std::find(name_tokens.begin(), name_tokens.end(), t) != name_tokens.end();
        const bool in_desc = std::find(desc_tokens.begin(), desc_tokens.end(), t) != desc_tokens.end();
        if (in_name || in_desc) ++matched;
        name_match = name_match || in_name;
      }
      if (matched == 0) continue;
    }
    if (permission_locked(actor, id) == Permission::none) continue;
    hits.push_back({matched, name_match, casefold(rec.name), &rec});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return std::make_tuple(b.matched, b.name_match, std::cref(a.name_key), std::cref(a.record->id)) <
           std::make_tuple(a.matched, a.name_match, std::cref(b.name_key), std::cref(b.record->id));
  });
  std::vector<ResourceRecord> out;
  for (const auto& h : hits) out.push_back(*h.record);
  return out;
}

ResourceRecord Repository::set_permissions(const ResourceId& id, std::vector<AclEntry> acl, const ResourceId& actor) {
  std::unique_lock lock(mutex_);
  ResourceRecord r = require_locked(id);
  if (r.resourceType == ResourceType::receipt) throw Error(errc::invalid_argument, "receipts share their instance's permissions");
  require_permission(actor, id, Permission::write);
  acl = merge_acl(acl);
  for (std::size_t i = 0; i < acl.size(); ++i) {
    const Principal& p = acl[i].principal;
    const bool known = p.kind == PrincipalKind::everyone ||
                       (p.kind == PrincipalKind::user && (users_.contains(p.id) || p.id == system_user())) ||
                       (p.kind == PrincipalKind::group && groups_.contains(p.id));
    if (!known) throw Error(errc::not_found, "unknown principal", json_pointer_append("/acl", i) + "/principal");
  }
  auto owner = std::find_if(acl.begin(), acl.end(), [&](const AclEntry& e) { return e.principal == Principal::user(r.owner); });
  if (owner == acl.end() || owner->level != Permission::write)
    throw Error(errc::owner_immutable, "the owner's write entry cannot be removed or demoted");
  r.acl = std::move(acl);
  r.version += 1;
  r.updatedAt = now_rfc3339();
  commit({{Op::put_record, record_to_json(r), r.id}});
  return r;
}

std::optional<ResourceRecord> Repository::find(const ResourceId& id) const {
  std::shared_lock lock(mutex_);
  auto it = records_.find(id);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::vector<ResourceRecord> Repository::records_of_type(ResourceType type) const {
  std::shared_lock lock(mutex_);
  std::vector<ResourceRecord> out;
  for (const auto& [id, rec] : records_)
    if (rec.resourceType == type) out.push_back(rec);
  return out;
}

std::vector<ResourceRecord> Repository::receipts_of(const ResourceId& instance) const {
  std::shared_lock lock(mutex_);
  std::vector<ResourceRecord> out;
  for (const auto& [id, rec] : records_)
    if (rec.resourceType == ResourceType::receipt && rec.subject == instance) out.push_back(rec);
  std::sort(out.begin(), out.end(), [](const ResourceRecord& a, const ResourceRecord& b) {
    return std::tie(a.createdAt, a.id) < std::tie(b.createdAt, b.id);
  });
  return out;
}

// ---- term store --------------------------------------------------------

std::vector<ProvisionalTerm> RepositoryTermStore::provisional_terms() const {
  std::vector<ProvisionalTerm> out;
  for (const auto& r : repo_.records_of_type(ResourceType::provisionalTerm)) out.push_back(provisional_term_from_json(r.payload));
  return out;
}

std::optional<ValueSet> RepositoryTermStore::value_set(const ResourceId& id) const {
  auto r = repo_.find(id);
  if (!r || r->resourceType != ResourceType::valueSet) return std::nullopt;
  return value_set_from_json(r->payload);
}

void RepositoryTermStore::put(ResourceType type, const ResourceId& id, const std::string& name, Json payload,
                              const std::optional<ResourceId>& actor) {
  ResourceRecord r;
  r.id = id;
  r.resourceType = type;
  r.name = name;
  r.payload = std::move(payload);
  r.acl = {{Principal::everyone(), Permission::read}};
  const ResourceId owner = actor.value_or(Repository::system_user());
  auto u = repo_.user(owner);
  r.parentFolder = u ? u->homeFolder : Repository::root_folder();
  repo_.put_resource(std::move(r), std::nullopt, owner);
}

void RepositoryTermStore::add_provisional_term(const ProvisionalTerm& term, const std::optional<ResourceId>& actor) {
  put(ResourceType::provisionalTerm, term.id, term.label, provisional_term_to_json(term), actor);
}

void RepositoryTermStore::add_value_set(const ValueSet& set, const std::optional<ResourceId>& actor) {
  put(ResourceType::valueSet, set.id, set.name, value_set_to_json(set), actor);
}

}  // namespace metaforge
