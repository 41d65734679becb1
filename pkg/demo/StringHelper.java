package demo.text;

public class StringHelper {

    /**
     * Reverses the given string using a string builder.
     */
    public static String reverseString(String input) {
        StringBuilder builder = new StringBuilder(input);
        return builder.reverse().toString();
    }

    // checks whether the string is empty or null
    public static boolean isEmptyString(String value) {
        return value == null || value.isEmpty();
    }

    /**
     * Counts how many times the character occurs in the text.
     */
    public static int countChar(String text, char target) {
        int count = 0;
        for (int i = 0; i < text.length(); i++) {
            if (text.charAt(i) == target) {
                count++;
            }
        }
        return count;
    }

    // joins the words with a single space separator
    public static String joinWords(String[] words) {
        String separator = " ";
        return String.join(separator, words);
    }
}
