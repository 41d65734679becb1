package demo.repo;

import java.util.HashMap;
import java.util.Map;

public class UserRepository {
    private final Map<Integer, User> usersById = new HashMap<>();

    /**
     * Finds the user with the given id, or null if no user exists.
     */
    public User findUserById(int id) {
        return usersById.get(id);
    }

    /**
     * Saves the user and replaces any existing user with the same id.
     */
    public void saveUser(User user) {
        usersById.put(user.getId(), user);
    }

    // remove the user with the given id from the repository
    public boolean removeUser(int id) {
        return usersById.remove(id) != null;
    }

    /* Something unrelated to this code. */
    public int countUsers() {
        return usersById.size();
    }
}
