package demo.security;

public class PasswordValidator {
    private static final int MIN_LENGTH = 8;

    /**
     * Checks whether the password is valid: it needs a minimum length and at least one digit.
     */
    public boolean isValidPassword(String password) {
        if (password == null || password.length() < MIN_LENGTH) {
            return false;
        }
        for (char c : password.toCharArray()) {
            if (Character.isDigit(c)) {
                return true;
            }
        }
        return false;
    }

    // count the digit characters in the password
    public int countDigits(String password) {
        int digits = 0;
        for (char c : password.toCharArray()) {
            if (Character.isDigit(c)) {
                digits++;
            }
        }
        return digits;
    }
}
